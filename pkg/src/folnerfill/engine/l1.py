"""Shrinking homology classes, completion fillings and decomposition of l1-cycles.

``shrink_class`` replaces a cycle c by the homologous cycle
``c' = project(cone(F_k . d c~)) / |F_k|`` whose norm tends to 0 with k,
together with the explicit chain ``w`` with ``d w = c' - c``.
``completion_fill`` telescopes a halving sequence of such representatives
into one filling of ``c - c_T``; ``l1_decompose`` regroups a summable family
into cycles.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, log2
from typing import Callable, List, Optional, Sequence

from ..barcomplex import cone, lift, project, translate, upstairs
from ..chains import QQ, Chain, ChainError
from ..groups import Lattice
from ..oracle.verify import boundary_terms, verify_fill
from .certificates import CapExceeded, Check, FillCertificate
from .lifting import BoxConvolver
from .rational import cone_cells_from_convolution, rational_ubc_fill, require_bar_full


# ---------------------------------------------------------------------------
# invariant cocycles used to detect homology classes
# ---------------------------------------------------------------------------

def coordinate_cocycle(i: int) -> Callable[[tuple], int]:
    """Degree 1: ``(g0, g1) -> (g1 - g0)_i``."""
    return lambda cell: cell[1][i] - cell[0][i]


def cup_cocycle(i: int, j: int) -> Callable[[tuple], int]:
    """Degree 2: ``(g0, g1, g2) -> (g1 - g0)_i (g2 - g1)_j``."""
    return lambda cell: (cell[1][i] - cell[0][i]) * (cell[2][j] - cell[1][j])


def standard_cocycles(d: int, degree: int) -> List[Callable[[tuple], int]]:
    if degree == 1:
        return [coordinate_cocycle(i) for i in range(d)]
    if degree == 2:
        return [cup_cocycle(i, j) for i in range(d) for j in range(d) if i < j]
    return []


def pair(phi: Callable[[tuple], int], c: Chain) -> Fraction:
    return sum((Fraction(v) * phi(cell) for cell, v in c.items()), Fraction(0))


# ---------------------------------------------------------------------------
# class shrinking
# ---------------------------------------------------------------------------

@dataclass
class ShrinkResult:
    cycle: Chain          # c'
    witness: Chain        # w with d w = c' - c
    certificate: FillCertificate


def first_letters(c: Chain) -> List[tuple]:
    return sorted({cell[1] for cell in c._terms})


def shrink_class(c: Chain, target, k_cap: int = 1024) -> ShrinkResult:
    target = Fraction(target)
    if target <= 0:
        raise ValueError("target norm must be positive")
    be = require_bar_full(c, "cycle")
    c = c.as_ring(QQ)
    n = c.degree
    if n < 1:
        raise ChainError("classes are shrunk in degree >= 1")
    zero = Chain.zero(be, n + 1, QQ)
    if c.is_zero():
        cert = FillCertificate("shrink", c, zero, Fraction(0), "c = 0", True, target=Chain.zero(be, n, QQ),
                               params={"target": target, "k": 0})
        return ShrinkResult(c, zero, cert)
    if c.boundary():
        raise ChainError("shrink_class needs a cycle")
    d = be.group.d
    S = first_letters(c)
    S = sorted(set(S) | {be.group.inv(s) for s in S})
    lattice = Lattice.spanning(d, S)
    c_up = lift(c)
    y = c_up.boundary()
    conv = BoxConvolver.build(y, lattice)
    kmax = 0 if lattice.rank == 0 else k_cap
    best = None
    chosen = None
    for k in range(kmax + 1):
        value = conv.norm(k) / lattice.box_size(k)
        if value <= target:
            chosen = k
            break
        if best is None or value < best[1]:
            best = (k, value)
    if chosen is None:
        raise CapExceeded(f"no box with k <= {kmax} brings the class below {target}; "
                          f"best norm {best[1]} at k = {best[0]}", best[0], best[1])
    k = chosen
    F = lattice.box(k)
    size = len(F)
    cells = cone_cells_from_convolution(conv, k, 1)
    up = upstairs(be)
    b_k = Chain._raw(up, n, QQ, cells)                      # cone(F . d c~), upstairs
    c_prime = project(b_k, "full").scale(Fraction(1, size))
    w = project(cone(b_k - translate(F, c_up)), "full").scale(Fraction(1, size))
    diff = c_prime - c
    pairings = [(pair(phi, c), pair(phi, c_prime)) for phi in standard_cocycles(d, n)]
    w_bound = c_prime.norm() + c.norm()
    checks = [
        Check("shrunk_norm", c_prime.norm(), target, "<=", "|c'| <= target"),
        Check("shrunk_is_cycle", Fraction(len(boundary_terms(c_prime)) if n >= 1 else 0), Fraction(0), "==",
              "d c' = 0"),
        Check("cocycle_pairings", Fraction(sum(1 for a, b in pairings if a != b)), Fraction(0), "==",
              "<phi, c> = <phi, c'> for the standard invariant cocycles"),
    ]
    cert = FillCertificate(
        "shrink", c, w, w_bound, f"|w| <= |c'| + |c| = {c_prime.norm()} + {c.norm()}",
        verify_fill(w, diff), checks, target=diff,
        params={"target": target, "k": k, "box_size": size, "S": [list(s) for s in S],
                "lattice_basis": [list(b) for b in lattice.basis], "shrunk_norm": c_prime.norm(),
                "pairings": [[str(a), str(b)] for a, b in pairings]})
    return ShrinkResult(c_prime, w, cert)


# ---------------------------------------------------------------------------
# completion filling
# ---------------------------------------------------------------------------

@dataclass
class CompletionResult:
    filling: Chain
    remainder: Chain            # c_T; d(filling) = c - c_T
    stages: int
    K: Fraction
    bound: Fraction
    tail_bound: Fraction
    boundary_ok: bool
    stage_rows: List[dict] = field(default_factory=list)
    cycle: Optional[Chain] = None

    kind = "complete"

    @property
    def verified(self) -> bool:
        return self.boundary_ok and self.filling.norm() <= self.bound and self.remainder.norm() <= self.tail_bound

    def to_json(self, include_chains: bool = True) -> dict:
        from ..serialize import chain_to_json, jsonable

        out = dict(self.summary(), stage_rows=jsonable(self.stage_rows),
                   bound_formula=f"|b| <= 4*K*|c| with K = {self.K}")
        if include_chains:
            out["filling"] = chain_to_json(self.filling)
            out["remainder"] = chain_to_json(self.remainder)
        return out

    def summary(self) -> dict:
        return {"kind": "complete", "norm_cycle": None if self.cycle is None else str(self.cycle.norm()),
                "stages": self.stages, "K": str(self.K),
                "norm_filling": str(self.filling.norm()), "bound": str(self.bound),
                "defect": str(self.remainder.norm()), "tolerance": str(self.tail_bound),
                "verified": self.verified}


def stages_for(norm_c: Fraction, tolerance: Fraction) -> int:
    """Smallest T with ``|c| / 2^T <= tolerance``."""
    T = 0
    while norm_c / 2 ** T > tolerance:
        T += 1
    return T


def completion_fill(c: Chain, eps, tolerance, k_cap: int = 1024) -> CompletionResult:
    """Telescoping filling with ``d b = c - c_T``, ``|c_T| <= tolerance`` and ``|b| <= 4 K |c|``.

    The representatives ``c_j`` (``|c_j| <= |c|/2^j``) are produced by
    :func:`shrink_class`, each from the previous one starting at ``c_0 = c``.
    Shrinking ``c_j`` itself keeps the box in the lattice spanned by the
    letters of ``c_j``, so each stage difference ``c_j - c_{j+1}`` has a
    witness (the shrink witness, negated) of bounded size in lattice units.
    Each difference is filled by :func:`rational_ubc_fill` with constant
    ``K = 1 + eps``.
    """
    tolerance = Fraction(tolerance)
    eps = Fraction(eps)
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    be = require_bar_full(c, "cycle")
    c = c.as_ring(QQ)
    K = 1 + eps
    n = c.degree
    if c.is_zero():
        zero = Chain.zero(be, n + 1, QQ)
        return CompletionResult(zero, c, 0, K, Fraction(0), tolerance, True, cycle=c)
    norm_c = c.norm()
    T = stages_for(norm_c, tolerance)
    reps = [c]
    witnesses = []                      # d w_j = c_{j+1} - c_j
    for j in range(1, T + 1):
        res = shrink_class(reps[-1], norm_c / 2 ** j, k_cap=k_cap)
        reps.append(res.cycle)
        witnesses.append(res.witness)
    b = Chain.zero(be, n + 1, QQ)
    rows = []
    for j in range(T):
        x = reps[j] - reps[j + 1]
        v = -witnesses[j]
        cert = rational_ubc_fill(x, v, eps, k_cap=k_cap)
        if not cert.verified:
            raise ChainError(f"stage {j} filling failed verification")
        b = b + cert.filling
        rows.append({"stage": j, "difference_norm": x.norm(), "fill_norm": cert.norm_filling,
                     "k": cert.params.get("k")})
    remainder = reps[T]
    ok = verify_fill(b, c - remainder)
    return CompletionResult(b, remainder, T, K, 4 * K * norm_c, tolerance, ok, rows, cycle=c)


# ---------------------------------------------------------------------------
# l1-cycle decomposition
# ---------------------------------------------------------------------------

@dataclass
class Decomposition:
    cycles: List[Chain]
    corrections: List[Chain]
    bounds: List[Fraction]
    defect_bound: Fraction
    boundary_ok: List[bool]

    kind = "decompose"

    @property
    def verified(self) -> bool:
        return all(self.boundary_ok) and all(ci.norm() <= bi for ci, bi in zip(self.cycles, self.bounds))

    def summary(self) -> dict:
        return {"kind": "decompose", "chunks": len(self.cycles),
                "norms": [str(c.norm()) for c in self.cycles], "bounds": [str(b) for b in self.bounds],
                "defect_bound": str(self.defect_bound), "verified": self.verified}

    def to_json(self, include_chains: bool = True) -> dict:
        from ..serialize import chain_to_json

        out = self.summary()
        out["bound_formula"] = "|c_k| <= |z_k| + K*|d s_k| + K*|d s_{k-1}|"
        out["boundary_ok"] = list(self.boundary_ok)
        if include_chains:
            out["cycles"] = [chain_to_json(c) for c in self.cycles]
            out["corrections"] = [chain_to_json(w) for w in self.corrections]
        return out


def l1_decompose(zs: Sequence[Chain], eps, tail=0, k_cap: int = 64) -> Decomposition:
    """Cycles ``c_k = z_k - w_k + w_{k-1}`` with ``d w_k = d s_k`` for the partial sums ``s_k``."""
    if not zs:
        raise ValueError("need at least one chunk")
    eps = Fraction(eps)
    K = 1 + eps
    be = require_bar_full(zs[0], "chunk")
    n = zs[0].degree
    zs = [z.as_ring(QQ) for z in zs]
    s = Chain.zero(be, n, QQ)
    prev_w = Chain.zero(be, n, QQ)
    prev_ds_norm = Fraction(0)
    cycles, corrections, bounds, oks = [], [], [], []
    ds = None
    for z in zs:
        s = s + z
        ds = s.boundary() if n >= 1 else None
        if ds is None or ds.is_zero():
            w = Chain.zero(be, n, QQ)
            ds_norm = Fraction(0)
        else:
            w = rational_ubc_fill(ds, s, eps, k_cap=k_cap).filling
            ds_norm = ds.norm()
        ck = z - w + prev_w
        cycles.append(ck)
        corrections.append(w)
        bounds.append(z.norm() + K * ds_norm + K * prev_ds_norm)
        oks.append(n == 0 or not boundary_terms(ck))
        prev_w, prev_ds_norm = w, ds_norm
    defect = Fraction(tail) + K * prev_ds_norm
    return Decomposition(cycles, corrections, bounds, defect, oks)
