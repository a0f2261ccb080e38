"""Exact dual simplex for ``min |b|_1 s.t. A b = rhs``.

The variables are the split columns ``b = b+ - b-`` (all costs 1) and one
artificial per row fixed at zero.  The starting basis is the artificials
with duals ``y = 0``, which is dual feasible because every cost is
positive; the dual simplex then drives out primal infeasibility (non-zero
artificials, negative basic values) while keeping every reduced cost
``1 -+ y.a_j`` non-negative.  Rows whose right-hand side is zero start
feasible, so the heavy primal degeneracy of boundary matrices costs
nothing.

Arithmetic is integer preserving: the code stores ``N = D * B^-1`` and
``D * x_B`` for the basis determinant D, so each pivot is one exact integer
division.  Rows enter the explicit basis only when a basic column touches
them; all others keep their artificial at zero with dual 0.  Ratio tests
price every column of the sparse matrix at once through int64 products,
split into 31-bit limbs when the integers grow.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

RULES = ("bland", "dantzig")
_LIMB = 31
_SAFE = 2 ** _LIMB


@dataclass
class LPSolution:
    status: str                          # "optimal" | "infeasible"
    value: Optional[Fraction]
    x: Dict[int, Fraction]               # signed column index (j + 1 or -(j + 1)) -> value
    duals: Dict[Hashable, Fraction]      # optimal duals, or a Farkas ray when infeasible
    basis: List[int]                     # signed column indices of the real basic variables
    pivots: int


class PivotLimit(RuntimeError):
    pass


def _as_int(v) -> int:
    return int(v)


class DualSimplex:
    """``columns[j]`` lists the non-zero ``(row, value)`` entries of column j."""

    def __init__(self, columns: Sequence[Sequence[Tuple[Hashable, int]]], rhs: Dict[Hashable, Fraction],
                 rule: str = "bland", max_pivots: int = 100000):
        if rule not in RULES:
            raise ValueError(f"unknown pivot rule {rule!r}; use one of {RULES}")
        self.rule = rule
        self.max_pivots = max_pivots
        rows: Dict[Hashable, int] = {}
        for r in sorted(rhs, key=repr):
            rows.setdefault(r, len(rows))
        ri, ci, vals = [], [], []
        for j, col in enumerate(columns):
            for r, v in col:
                ri.append(rows.setdefault(r, len(rows)))
                ci.append(j)
                vals.append(int(v))
        self.rows = rows
        self.row_labels = list(rows)
        self.ncols = len(columns)
        self.A = sp.csc_matrix((np.array(vals, dtype=np.int64), (ri, ci)), shape=(len(rows), self.ncols))
        self.AT = self.A.T.tocsr()
        nnz = np.diff(self.A.indptr)
        self._entry_bound = int(np.abs(self.A.data).max(initial=0)) * int(nnz.max(initial=0))
        self.L = 1
        for v in rhs.values():
            self.L = lcm(self.L, Fraction(v).denominator)
        self.rhs = {rows[r]: int(Fraction(v) * self.L) for r, v in rhs.items()}
        # explicit part of the basis
        self.active: List[int] = []          # active position -> row id
        self.pos: Dict[int, int] = {}        # row id -> active position
        self.N = np.zeros((0, 0), dtype=object)
        self.xN = []                         # D * L * x_B, Python ints
        self.basis: List[int] = []           # per active position: signed column index, or 0 for the artificial
        self.D = 1
        self.pivots = 0
        for r in self.rhs:
            self._activate([r])
        for r, v in self.rhs.items():
            self.xN[self.pos[r]] = v

    # -- explicit rows -----------------------------------------------------
    def _activate(self, row_ids) -> None:
        new = [r for r in row_ids if r not in self.pos]
        if not new:
            return
        m, k = len(self.active), len(new)
        N = np.zeros((m + k, m + k), dtype=object)
        N[:m, :m] = self.N
        for t, r in enumerate(new):
            N[m + t, m + t] = self.D
            self.pos[r] = m + t
            self.active.append(r)
            self.basis.append(0)
            self.xN.append(0)
        self.N = N

    def _column(self, j: int) -> List[Tuple[int, int]]:
        a, b = self.A.indptr[j], self.A.indptr[j + 1]
        return list(zip(self.A.indices[a:b].tolist(), self.A.data[a:b].tolist()))

    # -- exact products with every column -----------------------------------
    def _times_A(self, vec_active) -> np.ndarray:
        """``v . a_j`` for every column j, where v lives on the active rows."""
        full = np.zeros(len(self.rows), dtype=object)
        for p, r in enumerate(self.active):
            full[r] = vec_active[p]
        big = max((abs(int(v)) for v in vec_active), default=0)
        if big * max(self._entry_bound, 1) < 2 ** 62:
            return self.AT.dot(full.astype(np.int64)).astype(object)
        if self._entry_bound >= 2 ** 31:
            return np.array([sum(int(full[r]) * v for r, v in self._column(j)) for j in range(self.ncols)],
                            dtype=object)
        # split into 31-bit limbs so that every partial product fits in int64
        out = np.zeros(self.ncols, dtype=object)
        sign = np.array([1 if int(v) >= 0 else -1 for v in full], dtype=object)
        mag = np.abs(full)
        shift = 0
        while any(int(v) for v in mag):
            limb = (mag % _SAFE).astype(np.int64) * sign.astype(np.int64)
            out += self.AT.dot(limb).astype(object) * (1 << shift)
            mag = mag // _SAFE
            shift += _LIMB
        return out

    def scaled_duals(self) -> np.ndarray:
        """``D * y`` on the active rows: the basic costs times N."""
        cb = np.array([1 if j else 0 for j in self.basis], dtype=object)
        if not len(cb):
            return np.zeros(0, dtype=object)
        return cb.dot(self.N)

    # -- pivoting ----------------------------------------------------------
    def _leaving(self) -> Optional[int]:
        bad = [p for p in range(len(self.active))
               if (self.basis[p] == 0 and self.xN[p] != 0) or (self.basis[p] != 0 and self.xN[p] < 0)]
        if not bad:
            return None
        if self.rule == "bland":
            # artificials first (ordered by row), then real variables by column index
            return min(bad, key=lambda p: (self.basis[p] != 0, abs(self.basis[p]), self.active[p]))
        return max(bad, key=lambda p: (abs(self.xN[p]), -p))

    def _entering(self, p: int, Y: np.ndarray) -> Optional[int]:
        alpha = self._times_A(self.N[p])          # D * row p of B^-1 A
        ya = self._times_A(Y)                     # D * y.A
        # leaving to zero: from below needs alpha < 0, from above (artificial > 0) needs alpha > 0
        want = 1 if self.xN[p] > 0 else -1
        basic = {j for j in self.basis if j}
        best = None                               # (reduced cost numerator, |alpha|, signed index)
        for s in (1, -1):
            a = alpha * s
            num = self.D - ya * s                 # D * reduced cost of the signed column
            cand = np.flatnonzero(a * want > 0)
            for j in cand.tolist():
                q = s * (j + 1)
                if q in basic:
                    continue
                t = (int(num[j]), abs(int(a[j])), q)
                if best is None:
                    best = t
                    continue
                lhs, rhs = t[0] * best[1], best[0] * t[1]
                if lhs < rhs or (lhs == rhs and _order(q) < _order(best[2])):
                    best = t
        return None if best is None else best[2]

    def _pivot(self, p: int, q: int) -> None:
        self.pivots += 1
        if self.pivots > self.max_pivots:
            raise PivotLimit(f"more than {self.max_pivots} pivots")
        j, s = abs(q) - 1, (1 if q > 0 else -1)
        col = self._column(j)
        self._activate([r for r, _ in col])
        m = len(self.active)
        a = np.zeros(m, dtype=object)
        for r, v in col:
            a[self.pos[r]] = s * v
        w = self.N.dot(a)                         # D * B^-1 a_q
        piv = int(w[p])
        D = self.D
        Np = self.N[p].copy()
        xp = self.xN[p]
        for i in range(m):
            if i == p:
                continue
            wi = int(w[i])
            if wi:
                self.N[i] = (piv * self.N[i] - wi * Np) // D
                self.xN[i] = (piv * self.xN[i] - wi * xp) // D
            elif piv != D:
                self.N[i] = (piv * self.N[i]) // D
                self.xN[i] = (piv * self.xN[i]) // D
        self.basis[p] = q
        self.D = piv
        if piv < 0:
            self.N = -self.N
            self.xN = [-v for v in self.xN]
            self.D = -piv

    # -- driver ------------------------------------------------------------
    def solve(self) -> LPSolution:
        while True:
            p = self._leaving()
            if p is None:
                break
            Y = self.scaled_duals()
            q = self._entering(p, Y)
            if q is None:
                # row p of B^-1 annihilates every column and pairs non-trivially with rhs
                ray = {self.row_labels[r]: Fraction(int(self.N[p][i]), self.D)
                       for i, r in enumerate(self.active) if self.N[p][i]}
                return LPSolution("infeasible", None, {}, ray, self._real_basis(), self.pivots)
            self._pivot(p, q)
        scale = self.D * self.L
        x = {q: Fraction(self.xN[i], scale) for i, q in enumerate(self.basis) if q and self.xN[i]}
        Y = self.scaled_duals()
        duals = {self.row_labels[r]: Fraction(int(Y[i]), self.D) for i, r in enumerate(self.active) if Y[i]}
        value = sum(x.values(), Fraction(0))
        return LPSolution("optimal", value, x, duals, self._real_basis(), self.pivots)

    def _real_basis(self) -> List[int]:
        return [q for q in self.basis if q]


def _order(q: int) -> int:
    """Fixed order of the signed columns used for tie-breaking."""
    return 2 * (abs(q) - 1) + (q < 0)
