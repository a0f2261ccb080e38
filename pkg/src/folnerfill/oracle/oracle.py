"""Minimal l1-fillings on finite complexes and the algorithm-vs-optimum gap report.

``lp_min_fill`` solves ``min |b|_1 s.t. d b = c`` by splitting
``b = b+ - b-`` and running the exact dual simplex over every top cell of
the complex.  Every result is re-certified from scratch: an optimal
answer must satisfy ``d b* = c`` exactly (independent verifier), the duals
must satisfy ``|y . d sigma| <= 1`` on every top cell and ``y . c = |b*|``;
an infeasible answer must come with ``y`` vanishing on every boundary
column and ``y . c != 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import lcm
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Union

from ..barcomplex import BarBackend, project
from ..chains import QQ, Chain, ChainError
from .complexes import ComplexError, FiniteComplex, bar_ball, chain_radius
from .simplex import DualSimplex
from .verify import verify_fill


@dataclass
class LPResult:
    status: str                      # "optimal" | "infeasible"
    value: Optional[Fraction]
    filling: Optional[Chain]
    duals: Dict[Hashable, Fraction]
    basis: List[Hashable]
    provenance: str
    pivots: int = 0
    residual_zero: bool = False
    dual_feasible: bool = False
    strong_duality: bool = False
    farkas_ok: bool = False

    @property
    def certified(self) -> bool:
        if self.status == "optimal":
            return self.residual_zero and self.dual_feasible and self.strong_duality
        return self.farkas_ok

    def to_json(self, include_chain: bool = True) -> dict:
        from ..serialize import chain_to_json

        out = {"status": self.status, "value": None if self.value is None else str(self.value),
               "provenance": self.provenance, "certified": self.certified,
               "residual_zero": self.residual_zero, "dual_feasible": self.dual_feasible,
               "strong_duality": self.strong_duality, "farkas_ok": self.farkas_ok,
               "pivots": self.pivots, "basis_size": len(self.basis)}
        if include_chain and self.filling is not None:
            out["filling"] = chain_to_json(self.filling)
        return out


def lp_min_fill(c: Chain, cx: FiniteComplex, rule: str = "bland", max_pivots: int = 100000) -> LPResult:
    n = c.degree
    if n + 1 not in cx.cells or n not in cx.cells:
        raise ComplexError(f"the complex has no cells in degrees {n} and {n + 1}")
    if c.backend.id != cx.backend.id:
        raise ComplexError(f"cycle lives on {c.backend.id}, complex on {cx.backend.id}")
    if not cx.supports(c):
        raise ComplexError("the cycle is not supported on the complex")
    if c.ring.space is not None:
        raise ChainError("the LP oracle takes integral or rational chains")
    c = c.as_ring(QQ)
    top = cx.cells[n + 1]
    if c.is_zero():
        return LPResult("optimal", Fraction(0), Chain.zero(cx.backend, n + 1, QQ), {}, [], cx.provenance,
                        residual_zero=True, dual_feasible=True, strong_duality=True)
    cols = [cx.column(cell) for cell in top]
    lp = DualSimplex(cols, {cell: Fraction(v) for cell, v in c._terms.items()}, rule=rule, max_pivots=max_pivots)
    sol = lp.solve()
    basis = [(top[abs(q) - 1], 1 if q > 0 else -1) for q in sol.basis]
    res = LPResult(sol.status, sol.value, None, sol.duals, basis, cx.provenance, sol.pivots)
    y = sol.duals
    pair_c = sum((y.get(cell, 0) * Fraction(v) for cell, v in c._terms.items()), Fraction(0))
    # certify from scratch: one pass over every column of the complex
    den = 1
    for v in y.values():
        den = lcm(den, v.denominator)
    yi = {r: int(v * den) for r, v in y.items()}
    pairs = [sum(yi.get(r, 0) * v for r, v in col) for col in cols]     # den * (y . d sigma)
    if sol.status == "infeasible":
        res.farkas_ok = pair_c != 0 and all(t == 0 for t in pairs)
        return res
    acc: Dict = {}
    for q, v in sol.x.items():
        cell = top[abs(q) - 1]
        acc[cell] = acc.get(cell, 0) + (v if q > 0 else -v)
    b = Chain(cx.backend, n + 1, QQ, acc.items())
    res.filling = b
    res.residual_zero = verify_fill(b, c)
    res.dual_feasible = all(abs(t) <= den for t in pairs)
    res.strong_duality = pair_c == sol.value == b.norm()
    return res


def small_integral_fill(c: Chain, cx: FiniteComplex, max_norm: int = 4, max_columns: int = 40) -> Optional[Chain]:
    """Exhaustive search for an integral filling of norm <= max_norm on a tiny complex.

    Returns a filling of least norm, or None.  An experiment harness only:
    the cost is exponential in ``max_norm``.
    """
    n = c.degree
    top = [cell for cell in cx.cells[n + 1] if cx.column(cell)]
    if len(top) > max_columns:
        raise ComplexError(f"{len(top)} columns exceed the exhaustive-search limit {max_columns}")
    target = {cell: Fraction(v) for cell, v in c._terms.items()}
    signed = [(cell, s) for cell in top for s in (1, -1)]
    if not target:
        return Chain.zero(cx.backend, n + 1, c.ring)
    for t in range(1, max_norm + 1):
        for combo in combinations_with_replacement(range(len(signed)), t):
            acc: Dict = {}
            for i in combo:
                cell, s = signed[i]
                for r, v in cx.column(cell):
                    acc[r] = acc.get(r, 0) + s * v
            if {r: Fraction(v) for r, v in acc.items() if v} == target:
                terms: Dict = {}
                for i in combo:
                    cell, s = signed[i]
                    terms[cell] = terms.get(cell, 0) + s
                return Chain(cx.backend, n + 1, c.ring, terms.items())
    return None


# ---------------------------------------------------------------------------
# comparisons against algorithm output
# ---------------------------------------------------------------------------

def average(x: Chain) -> Chain:
    """``f (x) sigma -> (integral of f) sigma``; commutes with d and does not increase norms."""
    if x.ring.space is None:
        return x.as_ring(QQ)
    return Chain(x.backend, x.degree, QQ, ((cell, f.integral()) for cell, f in x._terms.items()))


@dataclass
class Comparison:
    """A rational cycle, a verified rational filling of it, and the algorithm's norm and bound."""

    cycle: Chain
    filling: Chain
    algorithm_norm: Fraction
    bound: Fraction


def comparison(cert) -> Comparison:
    kind = cert.kind
    if kind == "stable":
        dk = cert.params["d_k"]
        pushed = project(cert.filling, "full").as_ring(QQ).scale(Fraction(1, dk))
        return Comparison(cert.cycle.as_ring(QQ), pushed, cert.norm_filling / dk, cert.bound / dk)
    if kind == "complete":
        # the completion filling fills c - c_T
        target = (cert.cycle - cert.remainder).as_ring(QQ)
        return Comparison(target, cert.filling.as_ring(QQ), cert.filling.norm(), cert.bound)
    if kind in ("param", "mixed"):
        return Comparison(average(cert.cycle), average(cert.filling), cert.norm_filling, cert.bound)
    cycle = cert.target if cert.target is not None else cert.cycle
    return Comparison(cycle.as_ring(QQ), cert.filling.as_ring(QQ), cert.norm_filling, cert.bound)


def complex_for(comp: Comparison, radius: Optional[int] = None) -> FiniteComplex:
    be = comp.cycle.backend
    if not isinstance(be, BarBackend) or be.quotient != "full":
        raise ComplexError("bar-ball truncations are built for normalized bar chains")
    r = chain_radius(comp.cycle) if radius is None else radius
    return bar_ball(be.group.d, r, comp.cycle.degree, extra=[comp.filling])


@dataclass
class GapRow:
    name: str
    kind: str
    provenance: str
    norm_cycle: Fraction
    algorithm_norm: Fraction
    lp_optimum: Optional[Fraction]
    status: str
    bound: Fraction
    certified: bool

    @property
    def ratio(self) -> Optional[Fraction]:
        if self.lp_optimum in (None, 0):
            return None
        return self.algorithm_norm / self.lp_optimum

    @property
    def slack(self) -> Fraction:
        """Room left under the proven bound."""
        return self.bound - self.algorithm_norm

    @property
    def lp_gap(self) -> Optional[Fraction]:
        return None if self.lp_optimum is None else self.algorithm_norm - self.lp_optimum

    @property
    def flagged(self) -> bool:
        return self.status != "optimal" or not self.certified

    def to_json(self) -> dict:
        s = lambda v: None if v is None else str(v)
        return {"name": self.name, "kind": self.kind, "complex": self.provenance,
                "norm_cycle": s(self.norm_cycle), "algorithm_norm": s(self.algorithm_norm),
                "lp_optimum": s(self.lp_optimum), "ratio": s(self.ratio), "bound": s(self.bound),
                "slack": s(self.slack), "lp_gap": s(self.lp_gap), "status": self.status,
                "certified": self.certified, "flagged": self.flagged}


CSV_FIELDS = ["name", "kind", "complex", "norm_cycle", "algorithm_norm", "lp_optimum", "ratio", "bound",
              "slack", "lp_gap", "status", "certified", "flagged"]


@dataclass
class GapReport:
    rows: List[GapRow] = field(default_factory=list)

    @property
    def max_ratio(self) -> Optional[Fraction]:
        ratios = [r.ratio for r in self.rows if r.ratio is not None]
        return max(ratios) if ratios else None

    @property
    def min_slack(self) -> Optional[Fraction]:
        return min((r.slack for r in self.rows), default=None)

    def to_json(self) -> dict:
        s = lambda v: None if v is None else str(v)
        return {"rows": [r.to_json() for r in self.rows], "max_ratio": s(self.max_ratio),
                "min_slack": s(self.min_slack), "flagged": sum(r.flagged for r in self.rows)}


ComplexSource = Union[FiniteComplex, Callable[[Comparison], FiniteComplex], None]


def gap_report(certificates: Sequence, cx: ComplexSource = None, names: Optional[Sequence[str]] = None,
               rule: str = "bland") -> GapReport:
    """One row per certificate; infeasible or uncertified LPs are flagged, not dropped.

    ``cx`` is a fixed complex, a function building one per comparison, or
    None for the bar ball of the cycle's radius enlarged by the filling's
    support.
    """
    report = GapReport()
    for i, cert in enumerate(certificates):
        comp = comparison(cert)
        if isinstance(cx, FiniteComplex):
            use = cx
        elif cx is None:
            use = complex_for(comp)
        else:
            use = cx(comp)
        lp = lp_min_fill(comp.cycle, use, rule=rule)
        name = names[i] if names is not None else f"{cert.kind}-{i}"
        report.rows.append(GapRow(name, cert.kind, use.provenance, comp.cycle.norm(), comp.algorithm_norm,
                                  lp.value, lp.status, comp.bound, lp.certified))
    return report
