"""Lifting-lemma data and fast box translates of upstairs chains.

For an upstairs chain over ``Z^d`` with trivial coefficients, the terms in
one orbit ``tau`` form a finitely supported function ``y_tau`` on ``Z^d``
(the translate carrying the representative onto the term).  Translating
by a box F is then the convolution ``1_F * y_tau``, which numpy evaluates
exactly with integer box filters.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..barcomplex import BarBackend, bar, project
from ..chains import Chain, ChainError, Ring
from ..groups import Lattice, FiniteSubset, FreeAbelian, s_boundary


class PreconditionError(ValueError):
    """An input violates the precondition of a pipeline."""


@dataclass
class LiftingData:
    S: FiniteSubset
    C: Fraction
    K: List[tuple]
    reps: Dict[tuple, tuple]
    S_tau: Dict[tuple, List[tuple]]
    m: Fraction
    degree: int
    lattice: Optional[Lattice] = None

    def bound(self, F: FiniteSubset) -> Fraction:
        """Right-hand side ``C |d_S F|`` of the lifting estimate for an explicit F."""
        return self.C * len(s_boundary(F, self.S))

    def box_ratio(self, k: int) -> Fraction:
        return self.lattice.ratio(self.S, k)

    def box_boundary(self, k: int) -> int:
        return self.lattice.boundary_size(self.S, k)

    def to_json(self) -> dict:
        return {
            "S": [list(s) for s in self.S],
            "C": str(self.C),
            "K_size": len(self.K),
            "S_size": len(self.S),
            "m": str(self.m),
            "formula": f"C = |K|*|S|*m = {len(self.K)}*{len(self.S)}*{self.m} = {self.C}",
            "lattice_basis": [list(b) for b in self.lattice.basis] if self.lattice else None,
        }


def lifting_data(a: Chain, quotient="full") -> LiftingData:
    """K, representatives, S(tau), symmetrized S, m and ``C = |K| |S| m`` for a lift of zero."""
    backend = a.backend
    if not isinstance(backend, BarBackend) or backend.quotient != "up":
        raise ChainError("lifting data needs an upstairs bar chain")
    group = backend.group
    target = bar(group, quotient)
    proj = project(a, quotient)
    if proj:
        cell, coef = proj.items()[0]
        raise PreconditionError(f"not a lift of zero: orbit {list(map(list, cell))} projects to {coef}")
    ring = a.ring
    classes: Dict[tuple, List[tuple]] = {}
    for cell, _ in a.items():
        rep, _ = target.normalize(cell, a.coefficient(cell), ring)
        classes.setdefault(rep, []).append(cell)
    K = sorted(classes)
    reps = {}
    S_tau = {}
    S_all = set()
    m = Fraction(0)
    for tau in K:
        members = classes[tau]  # already in lexicographic order
        rep = members[0]
        reps[tau] = rep
        shifts = []
        for cell in members:
            s = group.mul(cell[0], group.inv(rep[0]))
            shifts.append(s)
            S_all.add(s)
            S_all.add(group.inv(s))
            m = max(m, ring.norm(a.coefficient(cell)))
        S_tau[tau] = shifts
    S = FiniteSubset(group, S_all)
    C = len(K) * len(S) * m
    lattice = Lattice.spanning(group.d, S) if isinstance(group, FreeAbelian) else None
    return LiftingData(S, Fraction(C), K, reps, S_tau, m, a.degree, lattice)


# ---------------------------------------------------------------------------
# orbit profiles and box convolutions
# ---------------------------------------------------------------------------

def orbit_profiles(x: Chain) -> Dict[tuple, Dict[tuple, object]]:
    """``tau -> {g: coefficient of g.tau}`` for an upstairs chain over ``Z^d``."""
    out: Dict[tuple, Dict[tuple, object]] = {}
    for cell, coef in x._terms.items():
        g = cell[0]
        tau = tuple(tuple(a - b for a, b in zip(e, g)) for e in cell)
        out.setdefault(tau, {})[g] = coef
    return out


def anchored_lift(c: Chain, y: Chain) -> Chain:
    """Lift c so that each term sits on a translate where the upstairs chain y has that orbit.

    Orbits met in only one translate by y then contribute nothing to
    ``y - lift(c)``, which keeps the lifting constants small.
    """
    from ..barcomplex import lift

    prof = orbit_profiles(y)
    anchors = {}
    for tau in c._terms:
        pts = prof.get(tau)
        if pts:
            anchors[tau] = min(pts)
    return lift(c, anchors)


@dataclass
class BoxConvolver:
    """Exact evaluation of ``|F_k . x|`` and of ``F_k . x`` itself for lattice boxes."""

    lattice: Lattice
    profiles: Dict[tuple, Dict[tuple, object]]
    scale: int = 1
    _groups: list = field(default_factory=list, repr=False)

    @classmethod
    def build(cls, x: Chain, lattice: Lattice) -> "BoxConvolver":
        if x.ring.space is not None:
            raise ChainError("box convolutions need trivial coefficients")
        profiles = orbit_profiles(x)
        den = 1
        for prof in profiles.values():
            for v in prof.values():
                if isinstance(v, Fraction):
                    den = lcm(den, v.denominator)
        self = cls(lattice, profiles, den)
        r = lattice.rank
        for tau, prof in sorted(profiles.items()):
            cosets: Dict[tuple, list] = {}
            for g, v in prof.items():
                key, q = lattice.reduce(g)
                cosets.setdefault(key, []).append((q, int(v * den)))
            for key, pts in sorted(cosets.items()):
                qs = np.array([q for q, _ in pts], dtype=np.int64).reshape(len(pts), r)
                vals = np.array([v for _, v in pts], dtype=np.int64)
                lo = qs.min(axis=0) if r else np.zeros(0, dtype=np.int64)
                hi = qs.max(axis=0) if r else np.zeros(0, dtype=np.int64)
                shape = tuple(int(h - l + 1) for l, h in zip(lo, hi))
                arr = np.zeros(shape, dtype=np.int64)
                if r:
                    np.add.at(arr, tuple((qs - lo).T), vals)
                else:
                    arr = np.array(vals.sum(), dtype=np.int64)
                self._groups.append((tau, key, lo, arr))
        return self

    def _convolve(self, arr: np.ndarray, k: int) -> np.ndarray:
        out = arr
        for ax in range(arr.ndim):
            pad = [(0, 0)] * arr.ndim
            pad[ax] = (k + 1, k)
            z = np.cumsum(np.pad(out, pad), axis=ax)
            n = z.shape[ax]
            hi = [slice(None)] * arr.ndim
            lo = [slice(None)] * arr.ndim
            hi[ax] = slice(k + 1, n)
            lo[ax] = slice(0, n - k - 1)
            out = z[tuple(hi)] - z[tuple(lo)]
        return out

    def norm(self, k: int) -> Fraction:
        """``|F_k . x|`` exactly."""
        total = 0
        for _, _, _, arr in self._groups:
            total += int(np.abs(self._convolve(arr, k)).sum())
        return Fraction(total, self.scale)

    def terms(self, k: int) -> Iterable[Tuple[tuple, tuple, int]]:
        """``(tau, h, integer value)``: coefficient of ``h.tau`` in ``F_k . x`` is value/scale."""
        lattice = self.lattice
        for tau, key, lo, arr in self._groups:
            out = self._convolve(arr, k)
            if not lattice.rank:
                if int(out):
                    yield tau, key, int(out)
                continue
            idx = np.nonzero(out)
            vals = out[idx].tolist()
            coords = (np.stack(idx, axis=1) + lo).tolist()
            for q, v in zip(coords, vals):
                yield tau, lattice.point(key, q), v
