"""Groups with decidable equality, Folner boxes, finite-index subgroups and towers.

Elements of ``Z^d`` are plain integer tuples.  Generic groups are given by
a multiplication oracle and are only used where the algorithms need no
Folner search of their own.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import gcd
from typing import Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

from .chains import MeasuredSet

Element = Hashable


class GroupError(ValueError):
    pass


class TowerInfeasible(GroupError):
    """No tower parameters satisfy the requested conditions."""


# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------

class Group:
    name = "group"
    abelian = False

    def mul(self, g, h):
        raise NotImplementedError

    def inv(self, g):
        raise NotImplementedError

    @property
    def identity(self):
        raise NotImplementedError

    def key(self, g):
        return g

    def encode(self, g):
        return g

    def decode(self, obj):
        return obj

    def pair(self, g, h):
        """Element of a product group built from two factor elements."""
        raise NotImplementedError


class FreeAbelian(Group):
    """``Z^d`` with elements as integer tuples; the group law is written additively."""

    abelian = True

    def __init__(self, d: int):
        if d < 1:
            raise GroupError("free abelian rank must be positive")
        self.d = d
        self.name = f"Z^{d}"
        self._identity = (0,) * d

    @property
    def identity(self):
        return self._identity

    def mul(self, g, h):
        return tuple(a + b for a, b in zip(g, h))

    def inv(self, g):
        return tuple(-a for a in g)

    def sub(self, g, h):
        return tuple(a - b for a, b in zip(g, h))

    @property
    def generators(self) -> List[tuple]:
        return [self.unit(i) for i in range(self.d)]

    def unit(self, i: int) -> tuple:
        return tuple(1 if j == i else 0 for j in range(self.d))

    def symmetric_generators(self) -> "FiniteSubset":
        gens = self.generators
        return FiniteSubset(self, gens + [self.inv(g) for g in gens])

    @staticmethod
    def word_length(g) -> int:
        return sum(abs(a) for a in g)

    def encode(self, g):
        return list(g)

    def decode(self, obj):
        if not isinstance(obj, (list, tuple)) or len(obj) != self.d or not all(
                isinstance(a, int) and not isinstance(a, bool) for a in obj):
            raise GroupError(f"expected an integer vector of length {self.d}, got {obj!r}")
        return tuple(obj)

    def pair(self, g, h):
        return tuple(g) + tuple(h)

    def check(self, g):
        if len(g) != self.d:
            raise GroupError(f"{g!r} is not an element of {self.name}")

    def __eq__(self, other):
        return isinstance(other, FreeAbelian) and other.d == self.d

    def __hash__(self):
        return hash(("Z", self.d))

    def __repr__(self):
        return f"FreeAbelian({self.d})"


class GenericGroup(Group):
    """Group given by a multiplication oracle, inverse, identity and generators."""

    def __init__(self, name: str, mul: Callable, inv: Callable, identity, generators: Sequence,
                 elements: Optional[Sequence] = None, key: Callable = None, abelian: bool = False):
        self.name = name
        self._mul = mul
        self._inv = inv
        self._identity = identity
        self.generators = list(generators)
        self.elements = list(elements) if elements is not None else None
        self._key = key or (lambda g: g)
        self.abelian = abelian

    @property
    def identity(self):
        return self._identity

    def mul(self, g, h):
        return self._mul(g, h)

    def inv(self, g):
        return self._inv(g)

    def key(self, g):
        return self._key(g)

    def pair(self, g, h):
        return (g, h)

    def check_axioms(self, sample: Iterable) -> None:
        sample = list(sample)
        e = self.identity
        for g in sample:
            if self.mul(g, e) != g or self.mul(e, g) != g:
                raise GroupError(f"identity law fails at {g!r}")
            if self.mul(g, self.inv(g)) != e:
                raise GroupError(f"inverse law fails at {g!r}")
        for g, h, k in product(sample, repeat=3):
            if self.mul(self.mul(g, h), k) != self.mul(g, self.mul(h, k)):
                raise GroupError(f"associativity fails at {(g, h, k)!r}")

    def __repr__(self):
        return f"GenericGroup({self.name!r})"


def cyclic_group(n: int) -> GenericGroup:
    """``Z/n`` as a generic finite group (used for oracle-interface tests)."""
    return GenericGroup(f"Z/{n}", lambda g, h: (g + h) % n, lambda g: (-g) % n, 0, [1 % n],
                        elements=list(range(n)), abelian=True)


def product_group(g: Group, h: Group) -> Group:
    if isinstance(g, FreeAbelian) and isinstance(h, FreeAbelian):
        return FreeAbelian(g.d + h.d)
    raise GroupError("products are only built for free abelian factors")


def parse_group(spec) -> FreeAbelian:
    """``"zd:2"``, ``"Z^2"`` or ``{"free_abelian": 2}``."""
    if isinstance(spec, dict):
        if "free_abelian" in spec:
            return FreeAbelian(int(spec["free_abelian"]))
        raise GroupError(f"unknown group spec {spec!r}")
    s = str(spec).strip()
    for prefix in ("zd:", "Z^", "z^"):
        if s.startswith(prefix):
            try:
                return FreeAbelian(int(s[len(prefix):]))
            except ValueError:
                break
    raise GroupError(f"unknown group spec {spec!r}; expected zd:<d>")


# ---------------------------------------------------------------------------
# finite subsets
# ---------------------------------------------------------------------------

class FiniteSubset:
    """Sorted, duplicate-free finite subset of a group."""

    __slots__ = ("group", "elements", "_set")

    def __init__(self, group: Group, elements: Iterable = ()):
        self.group = group
        self._set = frozenset(elements)
        self.elements = tuple(sorted(self._set, key=group.key))

    def __contains__(self, g):
        return g in self._set

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __eq__(self, other):
        return isinstance(other, FiniteSubset) and self._set == other._set

    def __hash__(self):
        return hash(self._set)

    def issubset(self, other: "FiniteSubset") -> bool:
        return self._set <= other._set

    def inverse(self) -> "FiniteSubset":
        return FiniteSubset(self.group, (self.group.inv(g) for g in self.elements))

    def union(self, other: "FiniteSubset") -> "FiniteSubset":
        return FiniteSubset(self.group, self._set | other._set)

    def symmetrized(self) -> "FiniteSubset":
        return self.union(self.inverse())

    def __repr__(self):
        if len(self) <= 8:
            return f"FiniteSubset({list(self.elements)})"
        return f"FiniteSubset(<{len(self)} elements>)"


def s_boundary(F: FiniteSubset, S: FiniteSubset) -> FiniteSubset:
    """``{g in F : g*s not in F for some s in S}``."""
    mul = F.group.mul
    return FiniteSubset(F.group, (g for g in F if any(mul(g, s) not in F for s in S)))


def boundary_ratio(F: FiniteSubset, S: FiniteSubset) -> Fraction:
    if not len(F):
        raise GroupError("boundary ratio of the empty set")
    return Fraction(len(s_boundary(F, S)), len(F))


def folner_box(d: int, k: int) -> FiniteSubset:
    """The box ``{0,...,k}^d`` in ``Z^d``."""
    if k < 0:
        raise GroupError("box size must be non-negative")
    return FiniteSubset(FreeAbelian(d), product(range(k + 1), repeat=d))


def echelon_basis(vectors: Iterable[Sequence[int]], d: int) -> Tuple[tuple, ...]:
    """Row-echelon integer basis (Hermite form) of the subgroup generated by ``vectors``."""
    rows = [list(v) for v in vectors if any(v)]
    basis = []
    col = 0
    while rows and col < d:
        nz = [r for r in rows if r[col]]
        if not nz:
            col += 1
            continue
        # Euclid on column `col` until a single row is left with a non-zero entry
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            pivot = nz[0]
            for r in nz[1:]:
                q = r[col] // pivot[col]
                for j in range(d):
                    r[j] -= q * pivot[j]
            nz = [r for r in nz if r[col]]
        pivot = nz[0]
        if pivot[col] < 0:
            pivot = [-a for a in pivot]
        rows = [r for r in rows if r[col] == 0 and any(r)]
        for b in basis:
            q = b[col] // pivot[col]
            for j in range(d):
                b[j] -= q * pivot[j]
        basis.append(pivot)
        col += 1
    return tuple(tuple(b) for b in basis)


@dataclass(frozen=True)
class Lattice:
    """A subgroup of ``Z^d`` with an echelon basis ``b_1..b_r``.

    Its boxes ``{sum_i t_i b_i : 0 <= t_i <= k}`` form a Folner sequence of
    the subgroup.  ``Lattice.spanning(d, S)`` is the subgroup generated by S,
    which is all the lifting estimate needs.
    """

    d: int
    basis: Tuple[tuple, ...]

    @classmethod
    def spanning(cls, d: int, S: Iterable[tuple]) -> "Lattice":
        return cls(d, echelon_basis(S, d))

    @classmethod
    def standard(cls, d: int) -> "Lattice":
        return cls(d, tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d)))

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> Tuple[int, ...]:
        return tuple(next(j for j, a in enumerate(b) if a) for b in self.basis)

    def reduce(self, g: Sequence[int]) -> Tuple[tuple, tuple]:
        """``(key, t)`` with ``g = key + sum_i t_i b_i``; key is canonical for the coset ``g + L``."""
        g = list(g)
        t = []
        for b, p in zip(self.basis, self.pivots):
            q = g[p] // b[p]
            t.append(q)
            if q:
                for j in range(self.d):
                    g[j] -= q * b[j]
        return tuple(g), tuple(t)

    def coords(self, g: Sequence[int]) -> tuple:
        key, t = self.reduce(g)
        if any(key):
            raise GroupError(f"{tuple(g)} is not in the lattice spanned by {self.basis}")
        return t

    def point(self, key: Sequence[int], t: Sequence[int]) -> tuple:
        g = list(key)
        for ti, b in zip(t, self.basis):
            if ti:
                for j in range(self.d):
                    g[j] += ti * b[j]
        return tuple(g)

    def box(self, k: int) -> FiniteSubset:
        zero = (0,) * self.d
        return FiniteSubset(FreeAbelian(self.d),
                            (self.point(zero, t) for t in product(range(k + 1), repeat=self.rank)))

    def box_size(self, k: int) -> int:
        return (k + 1) ** self.rank

    def interior_size(self, S: Iterable[tuple], k: int) -> int:
        """Number of box points ``g`` with ``g + s`` in the box for all s in S."""
        coords = [self.coords(s) for s in S]
        if not coords:
            return self.box_size(k)
        count = 1
        for i in range(self.rank):
            vals = [t[i] for t in coords]
            count *= max(0, k + 1 - (max(vals) - min(vals)))
        return count

    def boundary_size(self, S: Iterable[tuple], k: int) -> int:
        return self.box_size(k) - self.interior_size(S, k)

    def ratio(self, S: Iterable[tuple], k: int) -> Fraction:
        return Fraction(self.boundary_size(S, k), self.box_size(k))


# ---------------------------------------------------------------------------
# finite-index subgroups
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Subgroup:
    """``Gamma_k = ((k+1) Z)^d`` inside ``Z^d``."""

    d: int
    k: int

    @property
    def modulus(self) -> int:
        return self.k + 1

    @property
    def index(self) -> int:
        return (self.k + 1) ** self.d

    def contains(self, g) -> bool:
        return all(a % self.modulus == 0 for a in g)

    def rep(self, g) -> tuple:
        """Coset representative of ``g`` in ``{0..k}^d``."""
        m = self.modulus
        return tuple(a % m for a in g)

    @property
    def name(self) -> str:
        return f"({self.modulus}Z)^{self.d}"


def coset_reps(d: int, k: int) -> Tuple[Subgroup, FiniteSubset]:
    """Gamma_k and the box F_k, with the bijection F_k -> Gamma/Gamma_k verified."""
    sub = Subgroup(d, k)
    F = folner_box(d, k)
    residues = {sub.rep(g) for g in F}
    if len(residues) != len(F) or len(F) != sub.index:
        raise GroupError("box does not meet every coset exactly once")
    for g in F:
        if sub.rep(g) != g:
            raise GroupError(f"{g} is not its own coset representative")
    return sub, F


# ---------------------------------------------------------------------------
# finite measured actions and towers
# ---------------------------------------------------------------------------

class Odometer(MeasuredSet):
    """``(Z/N)^d`` with ``Z^d`` acting by coordinatewise translation."""

    def __init__(self, d: int, N: int):
        if d < 1 or N < 1:
            raise GroupError("odometer needs d >= 1 and N >= 1")
        super().__init__(f"odometer:{d}:{N}", N ** d)
        self.d = d
        self.N = N
        self.group = FreeAbelian(d)

    def coords(self, x: int) -> tuple:
        out = []
        for _ in range(self.d):
            x, r = divmod(x, self.N)
            out.append(r)
        return tuple(reversed(out))

    def index(self, coords: Sequence[int]) -> int:
        x = 0
        for a in coords:
            x = x * self.N + a % self.N
        return x

    def act(self, g, x: int) -> int:
        return self.index(tuple(a + b for a, b in zip(g, self.coords(x))))

    def perm(self, g) -> Tuple[int, ...]:
        return _odometer_perm(self.d, self.N, tuple(a % self.N for a in g))

    def translate(self, g, points: Iterable[int]) -> List[int]:
        p = self.perm(g)
        return sorted(p[x] for x in points)


@lru_cache(maxsize=4096)
def _odometer_perm(d: int, N: int, g: tuple) -> Tuple[int, ...]:
    X = Odometer.__new__(Odometer)
    X.d, X.N = d, N
    return tuple(X.index(tuple(a + b for a, b in zip(g, X.coords(x)))) for x in range(N ** d))


def parse_space(spec) -> Odometer:
    """``"odometer:<d>:<N>"`` or ``{"odometer": {"d": d, "N": N}}``."""
    if isinstance(spec, dict):
        inner = spec.get("odometer")
        if isinstance(inner, dict):
            return Odometer(int(inner["d"]), int(inner["N"]))
        raise GroupError(f"unknown space spec {spec!r}")
    parts = str(spec).split(":")
    if len(parts) == 3 and parts[0] == "odometer":
        try:
            return Odometer(int(parts[1]), int(parts[2]))
        except ValueError:
            pass
    raise GroupError(f"unknown space spec {spec!r}; expected odometer:<d>:<N>")


@dataclass
class Tower:
    shape: FiniteSubset
    base: Tuple[int, ...]

    def levels(self, space: Odometer) -> List[Tuple[tuple, List[int]]]:
        return [(g, space.translate(g, self.base)) for g in self.shape]


@dataclass
class TowerFamily:
    space: Odometer
    towers: List[Tower]
    leftover: Tuple[int, ...]
    params: Dict = field(default_factory=dict)

    @property
    def leftover_measure(self) -> Fraction:
        return Fraction(len(self.leftover), self.space.size)

    def verify(self) -> None:
        """Disjointness of all levels, partition of X, and the measure count."""
        X = self.space
        seen: Dict[int, str] = {}
        total = 0
        for i, tower in enumerate(self.towers):
            for g, level in tower.levels(X):
                for x in level:
                    if x in seen:
                        raise GroupError(f"point {x} lies in level {g} of tower {i} and in {seen[x]}")
                    seen[x] = f"level {g} of tower {i}"
            total += len(tower.shape) * len(tower.base)
        for x in self.leftover:
            if x in seen:
                raise GroupError(f"leftover point {x} also lies in {seen[x]}")
            seen[x] = "leftover"
        total += len(self.leftover)
        if len(seen) != X.size or total != X.size:
            raise GroupError(f"towers and leftover cover {len(seen)} of {X.size} points")

    def indicator_sum(self) -> List[int]:
        """Pointwise value of ``sum_i sum_{g in F_i} chi_{g A_i} + chi_B``."""
        vals = [0] * self.space.size
        for tower in self.towers:
            for _, level in tower.levels(self.space):
                for x in level:
                    vals[x] += 1
        for x in self.leftover:
            vals[x] += 1
        return vals

    def to_json(self) -> dict:
        return {
            "space": self.space.name,
            "towers": [{"shape": [list(g) for g in t.shape], "base": list(t.base)} for t in self.towers],
            "leftover": list(self.leftover),
            "leftover_measure": str(self.leftover_measure),
        }


def rokhlin_tower(X: Odometer, k: int) -> TowerFamily:
    """One tower with shape ``{0..k}^d``; exact tiling when ``(k+1) | N``."""
    if k < 0:
        raise GroupError("tower height must be non-negative")
    if k + 1 > X.N:
        raise TowerInfeasible(f"tower height {k + 1} exceeds the space size {X.N} per axis")
    m = k + 1
    if X.N % m == 0:
        starts = range(0, X.N, m)
    else:
        starts = range(0, X.N - k, m)
    base = tuple(sorted(X.index(c) for c in product(starts, repeat=X.d)))
    shape = folner_box(X.d, k)
    covered = set()
    for g in shape:
        covered.update(X.translate(g, base))
    leftover = tuple(x for x in range(X.size) if x not in covered)
    fam = TowerFamily(X, [Tower(shape, base)], leftover, {"k": k})
    fam.verify()
    return fam


def ow_towers(X: Odometer, S: FiniteSubset, eps, k_cap: int = 64, exact: bool = False) -> TowerFamily:
    """Tower family with Folner shapes ``|d_S(F^-1)|/|F| < eps`` and leftover measure ``< eps``.

    Searches ``F = {0..k}^d``; among the admissible k the first with an
    exact tiling ``(k+1) | N`` is preferred, otherwise the first whose
    leftover is small enough.  With ``exact=True`` only exact tilings count.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise GroupError("epsilon must be positive")
    S = FiniteSubset(X.group, S)
    lat = Lattice.standard(X.d)
    neg_S = [X.group.inv(s) for s in S]
    kmax = min(k_cap, X.N - 1)
    ratio_ok = [k for k in range(kmax + 1) if lat.ratio(neg_S, k) < eps]
    if not ratio_ok:
        best = min((lat.ratio(neg_S, k), k) for k in range(kmax + 1))
        raise TowerInfeasible(
            f"Folner constraint binds: no box with k <= {kmax} has |d_S(F^-1)|/|F| < {eps} "
            f"(best {best[0]} at k = {best[1]})")
    for k in ratio_ok:
        if X.N % (k + 1) == 0:
            fam = rokhlin_tower(X, k)
            break
    else:
        if exact:
            raise TowerInfeasible(
                f"tiling constraint binds: no admissible k in {ratio_ok[0]}..{kmax} has (k+1) | {X.N}")
        for k in ratio_ok:
            fam = rokhlin_tower(X, k)
            if fam.leftover_measure < eps:
                break
        else:
            raise TowerInfeasible(f"leftover constraint binds: no admissible k leaves measure < {eps}")
    F = fam.towers[0].shape
    ratio = boundary_ratio(F.inverse(), S)
    if not ratio < eps or not fam.leftover_measure < eps:
        raise GroupError("tower family failed its own verification")
    fam.params.update({"epsilon": str(eps), "ratio": str(ratio)})
    return fam
