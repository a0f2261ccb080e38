"""The homogeneous bar resolution of a group and its coefficient quotients.

Basis cells of degree n are (n+1)-tuples of group elements.  Upstairs
(quotient ``"up"``) every tuple is its own basis cell and the group acts by
``g.(a (x) s) = a.g^-1 (x) g s``.  Downstairs a tuple is replaced by the
representative of its orbit and the coefficient is transported by the
translating element:

* ``"full"``     -- orbit under the whole group; representative has first entry 1
* ``("sub", k)`` -- orbit under ``((k+1)Z)^d``; first entry reduced into ``{0..k}^d``
"""
from __future__ import annotations

from functools import lru_cache
from typing import Dict, Iterable, Optional, Tuple, Union

from .chains import Backend, Chain, ChainError, Ring, UnsupportedBackendError, ZZ, QQ
from .groups import FreeAbelian, FiniteSubset, Group, Subgroup, coset_reps, product_group

Quotient = Union[str, Tuple[str, int]]


def _quotient_label(q: Quotient) -> str:
    if q in ("up", "full"):
        return q
    if isinstance(q, tuple) and len(q) == 2 and q[0] == "sub" and isinstance(q[1], int) and q[1] >= 0:
        return f"sub:{q[1]}"
    raise ChainError(f"unknown quotient {q!r}")


class BarBackend(Backend):
    def __init__(self, group: Group, quotient: Quotient = "up"):
        self.group = group
        self.quotient = quotient
        self.id = f"bar:{group.name}:{_quotient_label(quotient)}"
        self.subgroup: Optional[Subgroup] = None
        if isinstance(quotient, tuple):
            if not isinstance(group, FreeAbelian):
                raise UnsupportedBackendError("subgroup quotients are only built for Z^d")
            self.subgroup = Subgroup(group.d, quotient[1])
        self._abelian = isinstance(group, FreeAbelian)

    # -- backend interface -------------------------------------------------
    def cell_degree(self, cell) -> int:
        return len(cell) - 1

    def faces(self, cell):
        for i in range(len(cell)):
            yield (-1 if i & 1 else 1), cell[:i] + cell[i + 1:]

    def encode_cell(self, cell):
        return [self.group.encode(g) for g in cell]

    def decode_cell(self, obj):
        if not isinstance(obj, (list, tuple)) or not obj:
            raise ChainError(f"a bar cell is a non-empty list of group elements, got {obj!r}")
        cell = tuple(self.group.decode(g) for g in obj)
        if self.quotient == "full" and cell[0] != self.group.identity:
            raise ChainError(f"cell {obj!r} is not normalized (first entry must be the identity)")
        if self.subgroup is not None and self.subgroup.rep(cell[0]) != cell[0]:
            raise ChainError(f"cell {obj!r} does not start with a coset representative")
        return cell

    def translation(self, cell):
        """Group element moving the stored representative onto ``cell``."""
        if self.quotient == "up":
            return self.group.identity
        g0 = cell[0]
        if self.subgroup is not None:
            return self.group.sub(g0, self.subgroup.rep(g0))
        return g0

    def normalize(self, cell, coef, ring: Ring):
        if self.quotient == "up":
            return cell, coef
        g = self.translation(cell)
        if g == self.group.identity:
            return cell, coef
        if self._abelian:
            cell = tuple(tuple(a - b for a, b in zip(x, g)) for x in cell)
        else:
            gi = self.group.inv(g)
            cell = tuple(self.group.mul(gi, x) for x in cell)
        if ring.space is not None:
            coef = coef.act(g)
        return cell, coef

    def boundary(self, chain: Chain) -> Chain:
        if chain.degree == 0:
            raise ChainError("boundary of a degree-0 chain is not defined (no augmentation)")
        if not (self._abelian and self.quotient in ("up", "full") and chain.ring.space is None):
            return super().boundary(chain)
        # fast path: trivial coefficients over Z^d
        acc: Dict = {}
        get = acc.get
        full = self.quotient == "full"
        for cell, coef in chain._terms.items():
            neg = -coef
            n = len(cell)
            for i in range(n):
                face = cell[:i] + cell[i + 1:]
                if full and i == 0:
                    g = face[0]
                    face = tuple(tuple(a - b for a, b in zip(x, g)) for x in face)
                v = neg if i & 1 else coef
                old = get(face)
                acc[face] = v if old is None else old + v
        return Chain._raw(self, chain.degree - 1, chain.ring, acc)

    # -- group action upstairs --------------------------------------------
    def act(self, g, x: Chain) -> Chain:
        """``g.(a (x) s) = a.g^-1 (x) g s`` on an upstairs chain."""
        self._require_up(x, "the group action")
        ginv = self.group.inv(g)
        mul = self.group.mul
        ring = x.ring
        acc = {}
        for cell, coef in x._terms.items():
            acc[tuple(mul(g, e) for e in cell)] = ring.act(coef, ginv)
        return Chain._raw(self, x.degree, ring, acc)

    def translate(self, F: Iterable, x: Chain) -> Chain:
        """``F.x = sum_{g in F} g.x``."""
        self._require_up(x, "translation")
        mul = self.group.mul
        inv = self.group.inv
        ring = x.ring
        acc: Dict = {}
        get = acc.get
        items = list(x._terms.items())
        for g in F:
            ginv = inv(g)
            for cell, coef in items:
                t = tuple(mul(g, e) for e in cell)
                v = ring.act(coef, ginv)
                old = get(t)
                acc[t] = v if old is None else old + v
        return Chain._raw(self, x.degree, ring, acc)

    def cone(self, z: Chain) -> Chain:
        """Prepend the identity to every tuple."""
        self._require_up(z, "the cone")
        e = (self.group.identity,)
        acc: Dict = {}
        for cell, coef in z._terms.items():
            t = e + cell
            old = acc.get(t)
            acc[t] = coef if old is None else old + coef
        return Chain._raw(self, z.degree + 1, z.ring, acc)

    def fill_boundary(self, c: Chain) -> Chain:
        """``cone(d c)``: same boundary as c, norm at most ``|d c|``."""
        return self.cone(c.boundary())

    def _require_up(self, x: Chain, what: str):
        if x.backend is not self and x.backend.id != self.id:
            raise ChainError(f"{what}: chain lives on {x.backend.id}, not {self.id}")
        if self.quotient != "up":
            raise ChainError(f"{what} is only defined upstairs, not on {self.id}")


@lru_cache(maxsize=None)
def bar(group: Group, quotient: Quotient = "up") -> BarBackend:
    return BarBackend(group, quotient)


def zd(d: int, quotient: Quotient = "up") -> BarBackend:
    return bar(FreeAbelian(d), quotient)


def product_backend(x: BarBackend, y: BarBackend) -> BarBackend:
    if x.quotient != y.quotient or x.quotient not in ("up", "full"):
        raise UnsupportedBackendError("cross products need two upstairs or two fully normalized bar chains")
    return bar(product_group(x.group, y.group), x.quotient)


def upstairs(backend: BarBackend) -> BarBackend:
    return bar(backend.group, "up")


# ---------------------------------------------------------------------------
# module level operations
# ---------------------------------------------------------------------------

def _bar(c: Chain) -> BarBackend:
    if not isinstance(c.backend, BarBackend):
        raise UnsupportedBackendError(f"{c.backend.id} is not a bar backend")
    return c.backend


def boundary(c: Chain) -> Chain:
    return c.boundary()


def act(g, x: Chain) -> Chain:
    return _bar(x).act(g, x)


def translate(F: Iterable, x: Chain) -> Chain:
    return _bar(x).translate(F, x)


def cone(z: Chain) -> Chain:
    return _bar(z).cone(z)


def fill_boundary(c: Chain) -> Chain:
    return _bar(c).fill_boundary(c)


def project(c: Chain, quotient: Quotient = "full") -> Chain:
    """Replace every tuple by its orbit representative, transporting coefficients.

    Works from upstairs to any quotient and from a subgroup quotient to the
    full quotient (the push-down along the finite cover).
    """
    src = _bar(c)
    target = bar(src.group, quotient)
    if src.quotient == "full" and target.quotient != "full":
        raise ChainError("cannot project a fully normalized chain to a finer quotient")
    if src.subgroup is not None and target.quotient != "full" and target is not src:
        raise ChainError("subgroup chains only push down to the full quotient")
    ring = c.ring
    normalize = target.normalize
    acc: Dict = {}
    get = acc.get
    for cell, coef in c._terms.items():
        t, v = normalize(cell, coef, ring)
        old = get(t)
        acc[t] = v if old is None else old + v
    return Chain._raw(target, c.degree, ring, acc)


def lift(c: Chain, anchors: Optional[Dict] = None) -> Chain:
    """One upstairs tuple per term; ``project(lift(c)) == c``.

    ``anchors`` optionally maps a stored representative to the group element
    whose translate should carry the term (defaults to the representative
    itself).
    """
    src = _bar(c)
    if src.quotient == "up":
        return c
    up = upstairs(src)
    ring = c.ring
    mul = src.group.mul
    acc = {}
    for cell, coef in c._terms.items():
        g = anchors.get(cell) if anchors else None
        if g is None or g == src.group.identity:
            acc[cell] = coef
        else:
            acc[tuple(mul(g, e) for e in cell)] = ring.act(coef, src.group.inv(g))
    return Chain._raw(up, c.degree, ring, acc)


def full_lift(c: Chain, k: int) -> Chain:
    """``project_{Gamma_k}(F_k . lift(c))`` for a trivial-coefficient chain c."""
    src = _bar(c)
    if src.quotient != "full" or c.ring.space is not None:
        raise ChainError("full lifts take fully normalized chains with trivial coefficients")
    if not isinstance(src.group, FreeAbelian):
        raise UnsupportedBackendError("full lifts are built for Z^d")
    _, F = coset_reps(src.group.d, k)
    return project(translate(F, lift(c)), ("sub", k))


def integral_part(c: Chain) -> Chain:
    """View a rational chain with integral coefficients over Z."""
    if c.ring == ZZ:
        return c
    return c.as_ring(ZZ)


def rational(c: Chain) -> Chain:
    return c if c.ring == QQ else c.as_ring(QQ)
