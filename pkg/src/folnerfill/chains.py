"""Formal chains with exact coefficients, l1-norms and the shuffle cross product.

A :class:`Chain` is a finite formal sum of cells with coefficients in one of
three rings:

* ``Z``      -- Python ``int``
* ``Q``      -- ``int`` or :class:`fractions.Fraction` (integral values are kept
  as ``int``)
* ``LinfZ``  -- :class:`StepFunction`, an integer valued function on a finite
  uniformly measured set

The owning chain complex (the *backend*) decides how raw cells are brought
into reduced form and how faces are computed.  Chains are immutable.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb, lcm
from typing import Any, Callable, Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

Cell = Any
Coef = Any


class ChainError(ValueError):
    """Structural mismatch: degree, backend or ring disagree."""


class UnsupportedBackendError(ChainError):
    pass


# ---------------------------------------------------------------------------
# measured sets and step functions
# ---------------------------------------------------------------------------

class MeasuredSet:
    """Points ``0..size-1``, each of measure ``1/size``."""

    def __init__(self, name: str, size: int):
        if size <= 0:
            raise ValueError("a measured set needs at least one point")
        self.name = name
        self.size = size

    def measure(self, points: Iterable[int]) -> Fraction:
        return Fraction(len(set(points)), self.size)

    def total_measure(self) -> Fraction:
        return Fraction(self.size, self.size)

    def perm(self, g) -> Tuple[int, ...]:
        """Permutation ``x -> g.x``; trivial action unless a subclass acts."""
        return tuple(range(self.size))

    def __eq__(self, other):
        return isinstance(other, MeasuredSet) and (self.name, self.size) == (other.name, other.size)

    def __hash__(self):
        return hash((self.name, self.size))

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r}, {self.size})"


class StepFunction:
    """An element of L^oo(X; Z) for a finite measured set X.

    Stored densely as one integer per point; :meth:`blocks` gives the
    block form (level sets of non-zero values).
    """

    __slots__ = ("space", "values", "_hash")

    def __init__(self, space: MeasuredSet, values: Sequence[int]):
        values = tuple(int(v) for v in values)
        if len(values) != space.size:
            raise ValueError(f"step function on {space.name} needs {space.size} values, got {len(values)}")
        self.space = space
        self.values = values
        self._hash = None

    @classmethod
    def constant(cls, space: MeasuredSet, value: int) -> "StepFunction":
        return cls(space, (value,) * space.size)

    @classmethod
    def indicator(cls, space: MeasuredSet, points: Iterable[int]) -> "StepFunction":
        vals = [0] * space.size
        for p in points:
            vals[p] = 1
        return cls(space, vals)

    @classmethod
    def from_blocks(cls, space: MeasuredSet, blocks: Iterable[Tuple[Iterable[int], int]]) -> "StepFunction":
        vals = [0] * space.size
        seen = set()
        for points, value in blocks:
            for p in points:
                if not 0 <= p < space.size:
                    raise ValueError(f"point {p} outside {space.name}")
                if p in seen:
                    raise ValueError(f"point {p} occurs in two blocks")
                seen.add(p)
                vals[p] = int(value)
        return cls(space, vals)

    def blocks(self) -> list:
        """Level sets of the non-zero values, ordered by their first point."""
        by_value: Dict[int, list] = {}
        for x, v in enumerate(self.values):
            if v:
                by_value.setdefault(v, []).append(x)
        return sorted(((tuple(pts), v) for v, pts in by_value.items()), key=lambda b: b[0][0])

    def support(self) -> Tuple[int, ...]:
        return tuple(x for x, v in enumerate(self.values) if v)

    def norm(self) -> Fraction:
        return Fraction(sum(abs(v) for v in self.values), self.space.size)

    def sup_norm(self) -> int:
        return max(abs(v) for v in self.values)

    def integral(self) -> Fraction:
        return Fraction(sum(self.values), self.space.size)

    def is_zero(self) -> bool:
        return not any(self.values)

    def act(self, g) -> "StepFunction":
        """Right action ``(f.g)(x) = f(g.x)``."""
        perm = self.space.perm(g)
        vals = self.values
        return StepFunction(self.space, [vals[perm[x]] for x in range(len(vals))])

    def _check(self, other: "StepFunction"):
        if other.space != self.space:
            raise ChainError(f"step functions live on different spaces: {self.space.name} vs {other.space.name}")

    def __add__(self, other):
        if isinstance(other, int):
            other = StepFunction.constant(self.space, other)
        self._check(other)
        return StepFunction(self.space, [a + b for a, b in zip(self.values, other.values)])

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return StepFunction(self.space, [-a for a in self.values])

    def __mul__(self, other):
        if isinstance(other, StepFunction):
            self._check(other)
            return StepFunction(self.space, [a * b for a, b in zip(self.values, other.values)])
        if isinstance(other, Fraction):
            if other.denominator != 1:
                raise ChainError("L^oo(X;Z) coefficients only admit integral scalars")
            other = other.numerator
        return StepFunction(self.space, [a * other for a in self.values])

    __rmul__ = __mul__

    def __abs__(self):
        return self.norm()

    def __eq__(self, other):
        if isinstance(other, StepFunction):
            return self.space == other.space and self.values == other.values
        if isinstance(other, int) and other == 0:
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.space, self.values))
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"StepFunction({self.space.name}, blocks={self.blocks()})"


# ---------------------------------------------------------------------------
# coefficient rings
# ---------------------------------------------------------------------------

class Ring:
    """Coefficient ring tag.  ``LinfZ`` rings carry their measured space."""

    def __init__(self, name: str, space: Optional[MeasuredSet] = None):
        if name not in ("Z", "Q", "LinfZ"):
            raise ValueError(f"unknown ring {name!r}")
        if (name == "LinfZ") != (space is not None):
            raise ValueError("LinfZ needs a space, Z and Q must not have one")
        self.name = name
        self.space = space

    @property
    def trivial_action(self) -> bool:
        return self.space is None

    def coerce(self, value) -> Coef:
        if self.name == "Z":
            if isinstance(value, Fraction):
                if value.denominator != 1:
                    raise ChainError(f"{value} is not an integer")
                return value.numerator
            if isinstance(value, int):
                return value
            raise ChainError(f"cannot use {value!r} as an integer coefficient")
        if self.name == "Q":
            if isinstance(value, Fraction):
                return value.numerator if value.denominator == 1 else value
            if isinstance(value, int):
                return value
            raise ChainError(f"cannot use {value!r} as a rational coefficient")
        if isinstance(value, StepFunction):
            if value.space != self.space:
                raise ChainError("step function on the wrong space")
            return value
        if isinstance(value, (int, Fraction)):
            return StepFunction.constant(self.space, self.coerce_int(value))
        raise ChainError(f"cannot use {value!r} as an L^oo(X;Z) coefficient")

    @staticmethod
    def coerce_int(value) -> int:
        if isinstance(value, Fraction):
            if value.denominator != 1:
                raise ChainError(f"{value} is not an integer")
            return value.numerator
        return int(value)

    def norm(self, coef) -> Fraction:
        if self.name == "LinfZ":
            return coef.norm()
        return Fraction(abs(coef))

    def act(self, coef, g):
        """Right action of a group element on a coefficient."""
        if self.space is None:
            return coef
        return coef.act(g)

    def __eq__(self, other):
        return isinstance(other, Ring) and self.name == other.name and self.space == other.space

    def __hash__(self):
        return hash((self.name, self.space))

    def __repr__(self):
        return self.name if self.space is None else f"LinfZ({self.space.name})"


ZZ = Ring("Z")
QQ = Ring("Q")


def linf(space: MeasuredSet) -> Ring:
    return Ring("LinfZ", space)


def _normal_q(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def _is_zero(coef) -> bool:
    if isinstance(coef, StepFunction):
        return coef.is_zero()
    return coef == 0


# ---------------------------------------------------------------------------
# backends
# ---------------------------------------------------------------------------

class Backend:
    """A chain complex with a distinguished basis.

    Subclasses provide :meth:`faces` and, for quotient complexes,
    :meth:`normalize`, which maps a raw cell with coefficient to the
    stored orbit representative (transporting the coefficient).
    """

    id: str = "abstract"

    def normalize(self, cell: Cell, coef: Coef, ring: Ring) -> Tuple[Cell, Coef]:
        return cell, coef

    def faces(self, cell: Cell) -> Iterator[Tuple[int, Cell]]:
        raise NotImplementedError

    def cell_degree(self, cell: Cell) -> int:
        raise NotImplementedError

    def cell_key(self, cell: Cell):
        return cell

    def encode_cell(self, cell: Cell):
        return cell

    def decode_cell(self, obj) -> Cell:
        return obj

    def boundary(self, chain: "Chain") -> "Chain":
        if chain.degree == 0:
            raise ChainError("boundary of a degree-0 chain is not defined (no augmentation)")
        acc: Dict[Cell, Coef] = {}
        ring = chain.ring
        normalize = self.normalize
        for cell, coef in chain._terms.items():
            neg = -coef
            for sign, face in self.faces(cell):
                fcell, fcoef = normalize(face, coef if sign > 0 else neg, ring)
                old = acc.get(fcell)
                acc[fcell] = fcoef if old is None else old + fcoef
        return Chain._raw(self, chain.degree - 1, ring, acc)

    def __repr__(self):
        return f"<backend {self.id}>"


# ---------------------------------------------------------------------------
# chains
# ---------------------------------------------------------------------------

class Chain:
    """Reduced finite formal sum over the basis of a backend."""

    __slots__ = ("backend", "degree", "ring", "_terms")

    def __init__(self, backend: Backend, degree: int, ring: Ring, terms: Iterable[Tuple[Cell, Coef]] = ()):
        if degree < 0:
            raise ChainError("degree must be non-negative")
        acc: Dict[Cell, Coef] = {}
        if isinstance(terms, Mapping):
            terms = terms.items()
        for cell, coef in terms:
            if backend.cell_degree(cell) != degree:
                raise ChainError(f"cell {cell!r} does not have degree {degree}")
            cell, coef = backend.normalize(cell, ring.coerce(coef), ring)
            old = acc.get(cell)
            acc[cell] = coef if old is None else old + coef
        self.backend = backend
        self.degree = degree
        self.ring = ring
        self._terms = _prune(acc, ring)

    @classmethod
    def _raw(cls, backend, degree, ring, acc: Dict[Cell, Coef]) -> "Chain":
        # acc is owned by the new chain; cells already reduced
        self = object.__new__(cls)
        self.backend = backend
        self.degree = degree
        self.ring = ring
        self._terms = _prune(acc, ring)
        return self

    @classmethod
    def zero(cls, backend: Backend, degree: int, ring: Ring) -> "Chain":
        return cls._raw(backend, degree, ring, {})

    # -- inspection -------------------------------------------------------
    def items(self) -> list:
        """Terms in canonical (lexicographic cell-encoding) order."""
        key = self.backend.cell_key
        return sorted(self._terms.items(), key=lambda t: key(t[0]))

    def cells(self) -> list:
        return [c for c, _ in self.items()]

    def coefficient(self, cell: Cell) -> Coef:
        return self._terms.get(cell, 0)

    @property
    def terms(self) -> Mapping[Cell, Coef]:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self.items())

    def __contains__(self, cell):
        return cell in self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def norm(self) -> Fraction:
        return l1_norm(self)

    def sup_coefficient_norm(self) -> Fraction:
        """Sum over terms of the sup-norm of the coefficient."""
        if self.ring.name == "LinfZ":
            return Fraction(sum(c.sup_norm() for c in self._terms.values()))
        return self.norm()

    # -- arithmetic -------------------------------------------------------
    def _compatible(self, other: "Chain"):
        if not isinstance(other, Chain):
            raise TypeError(f"expected a chain, got {type(other).__name__}")
        if self.degree != other.degree:
            raise ChainError(f"degree mismatch: {self.degree} vs {other.degree}")
        if self.backend.id != other.backend.id:
            raise ChainError(f"backend mismatch: {self.backend.id} vs {other.backend.id}")
        if self.ring != other.ring:
            raise ChainError(f"ring mismatch: {self.ring} vs {other.ring}")

    def __add__(self, other: "Chain") -> "Chain":
        self._compatible(other)
        acc = dict(self._terms)
        for cell, coef in other._terms.items():
            old = acc.get(cell)
            acc[cell] = coef if old is None else old + coef
        return Chain._raw(self.backend, self.degree, self.ring, acc)

    def __sub__(self, other: "Chain") -> "Chain":
        return self + (-other)

    def __neg__(self) -> "Chain":
        return Chain._raw(self.backend, self.degree, self.ring, {c: -v for c, v in self._terms.items()})

    def scale(self, k) -> "Chain":
        ring = self.ring
        if ring.name == "Z":
            k = ring.coerce(k)
        elif ring.name == "Q":
            if not isinstance(k, (int, Fraction)):
                raise ChainError(f"cannot scale a rational chain by {k!r}")
        elif isinstance(k, StepFunction):
            if k.space != ring.space:
                raise ChainError("scaling step function lives on another space")
        else:
            k = Ring.coerce_int(k)
        return Chain._raw(self.backend, self.degree, ring, {c: v * k for c, v in self._terms.items()})

    def __rmul__(self, k) -> "Chain":
        return self.scale(k)

    def map_coefficients(self, fn: Callable[[Coef], Coef], ring: Optional[Ring] = None) -> "Chain":
        ring = ring or self.ring
        return Chain._raw(self.backend, self.degree, ring, {c: fn(v) for c, v in self._terms.items()})

    def as_ring(self, ring: Ring) -> "Chain":
        """Change of coefficients along Z -> Q or Z -> L^oo(X;Z) (constants)."""
        if ring == self.ring:
            return self
        src = self.ring.name
        if src == "Z" and ring.name == "Q":
            return Chain._raw(self.backend, self.degree, ring, dict(self._terms))
        if src == "Q" and ring.name == "Z":
            return Chain._raw(self.backend, self.degree, ring, {c: ZZ.coerce(v) for c, v in self._terms.items()})
        if src in ("Z", "Q") and ring.name == "LinfZ":
            return Chain._raw(self.backend, self.degree, ring, {c: ring.coerce(v) for c, v in self._terms.items()})
        raise ChainError(f"no coefficient change from {self.ring} to {ring}")

    def restrict(self, cells: Iterable[Cell]) -> "Chain":
        keep = set(cells)
        return Chain._raw(self.backend, self.degree, self.ring, {c: v for c, v in self._terms.items() if c in keep})

    def boundary(self) -> "Chain":
        return self.backend.boundary(self)

    # -- comparison -------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, Chain):
            return NotImplemented
        return (self.degree == other.degree and self.backend.id == other.backend.id
                and self.ring == other.ring and self._terms == other._terms)

    def __hash__(self):
        return hash((self.backend.id, self.degree, frozenset(self._terms.items())))

    def __repr__(self):
        body = " + ".join(f"{v}*{c}" for c, v in self.items()[:6])
        more = "" if len(self) <= 6 else f" + ... ({len(self)} terms)"
        return f"Chain[{self.backend.id}, deg {self.degree}, {self.ring}]({body or '0'}{more})"


def _prune(acc: Dict[Cell, Coef], ring: Ring) -> Dict[Cell, Coef]:
    if ring.name == "LinfZ":
        return {c: v for c, v in acc.items() if not v.is_zero()}
    if ring.name == "Q":
        return {c: (v.numerator if type(v) is Fraction and v.denominator == 1 else v)
                for c, v in acc.items() if v}
    return {c: v for c, v in acc.items() if v != 0}


# ---------------------------------------------------------------------------
# module level operations
# ---------------------------------------------------------------------------

def l1_norm(c: Chain) -> Fraction:
    """Sum of the coefficient norms; for step functions ``(1/N) sum_x |f(x)|``."""
    if c.ring.name == "LinfZ":
        n = c.ring.space.size
        return Fraction(sum(sum(abs(v) for v in f.values) for f in c._terms.values()), n)
    # integer arithmetic over a common denominator instead of repeated Fraction sums
    whole = 0
    parts: Dict[int, int] = {}
    for v in c._terms.values():
        if type(v) is int:
            whole += abs(v)
        else:
            q = v.denominator
            parts[q] = parts.get(q, 0) + abs(v.numerator)
    if not parts:
        return Fraction(whole)
    den = 1
    for q in parts:
        den = lcm(den, q)
    return Fraction(whole * den + sum(n * (den // q) for q, n in parts.items()), den)


def chain_add(a: Chain, b: Chain) -> Chain:
    return a + b


def chain_scale(k, a: Chain) -> Chain:
    return a.scale(k)


def shuffles(p: int, q: int) -> Iterator[Tuple[int, Tuple[Tuple[int, int], ...]]]:
    """(p,q)-shuffles as lattice paths ``(i_t, j_t)`` from (0,0) to (p,q), with sign."""
    from itertools import combinations

    n = p + q
    for ups in combinations(range(1, n + 1), p):
        # ups: steps at which the first index advances
        sign_exp = sum(u - (a + 1) for a, u in enumerate(ups))
        ups_set = set(ups)
        i = j = 0
        path = [(0, 0)]
        for t in range(1, n + 1):
            if t in ups_set:
                i += 1
            else:
                j += 1
            path.append((i, j))
        yield (-1) ** sign_exp, tuple(path)


def cross_product(x: Chain, y: Chain) -> Chain:
    """Eilenberg-Zilber shuffle product of bar chains over G and H, over G x H."""
    from .barcomplex import BarBackend, product_backend

    if not isinstance(x.backend, BarBackend) or not isinstance(y.backend, BarBackend):
        raise UnsupportedBackendError("the cross product is only defined on bar (homogeneous tuple) backends")
    backend = product_backend(x.backend, y.backend)
    ring = _product_ring(x.ring, y.ring)
    p, q = x.degree, y.degree
    paths = list(shuffles(p, q))
    pair = backend.group.pair
    acc: Dict[Cell, Coef] = {}
    for xc, xv in x._terms.items():
        for yc, yv in y._terms.items():
            coef = _coef_product(xv, yv)
            for sign, path in paths:
                cell = tuple(pair(xc[i], yc[j]) for i, j in path)
                cell, v = backend.normalize(cell, coef if sign > 0 else -coef, ring)
                old = acc.get(cell)
                acc[cell] = v if old is None else old + v
    return Chain._raw(backend, p + q, ring, acc)


def _product_ring(r: Ring, s: Ring) -> Ring:
    if r.space is not None or s.space is not None:
        raise UnsupportedBackendError("cross products are built for trivial coefficients only")
    return QQ if "Q" in (r.name, s.name) else ZZ


def _coef_product(a, b):
    return _normal_q(a * b)


def shuffle_bound(p: int, q: int) -> int:
    return comb(p + q, p)
