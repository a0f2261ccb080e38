"""Independent check of ``d b = c``.

The boundary is recomputed here from scratch and shares no code with the
chain backends: bar chains over ``Z^d`` with trivial coefficients are
handled as integer arrays (faces by slicing, orbit normalization by
subtraction, merging by ``np.unique``); parametrised bar chains and
finite complexes use their own explicit loops and matrices.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Dict, Tuple

import numpy as np

from ..chains import Chain, StepFunction


def _targets(backend) -> Tuple[str, int]:
    ident = backend.id.split(":")
    kind = ident[2]
    if kind == "sub":
        return "sub", int(ident[3])
    return kind, 0


def _scaled(coefs) -> Tuple[list, int]:
    den = 1
    for v in coefs:
        if isinstance(v, Fraction):
            den = lcm(den, v.denominator)
    return [v.numerator * (den // v.denominator) if isinstance(v, Fraction) else int(v) * den for v in coefs], den


def _unique_rows(rows: np.ndarray):
    """``np.unique(rows, axis=0, return_inverse=True)`` through one packed int64 key per row when it fits."""
    lo = rows.min(axis=0)
    span = rows.max(axis=0) - lo + 1
    total = 1
    for s in span.tolist():
        total *= s
    if total >= 2 ** 62:
        uniq, inv = np.unique(rows, axis=0, return_inverse=True)
        return uniq, inv.reshape(-1)
    strides = np.ones(len(span), dtype=np.int64)
    for j in range(len(span) - 2, -1, -1):
        strides[j] = strides[j + 1] * span[j + 1]
    keys = (rows - lo) @ strides
    ukeys, inv = np.unique(keys, return_inverse=True)
    uniq = (ukeys[:, None] // strides) % span + lo
    return uniq, inv.reshape(-1)


def _normalize_rows(arr: np.ndarray, kind: str, modulus: int) -> np.ndarray:
    # arr: (T, n+1, d)
    if kind == "up":
        return arr
    first = arr[:, :1, :]
    if kind == "full":
        return arr - first
    return arr - (first - np.mod(first, modulus))


def _array_boundary(b: Chain) -> Dict[tuple, Fraction]:
    kind, k = _targets(b.backend)
    items = list(b._terms.items())
    if not items:
        return {}
    cells = np.array([c for c, _ in items], dtype=np.int64)  # (T, n+2, d)
    vals, den = _scaled([v for _, v in items])
    big = max(abs(v) for v in vals) > 2 ** 40
    weights = np.array(vals, dtype=object if big else np.int64)
    T, n2, d = cells.shape
    faces = []
    signs = []
    for i in range(n2):
        f = np.delete(cells, i, axis=1)
        faces.append(_normalize_rows(f, kind, k + 1).reshape(T, -1))
        signs.append(weights if i % 2 == 0 else -weights)
    rows = np.concatenate(faces)
    w = np.concatenate(signs)
    uniq, inv = _unique_rows(rows)
    if big:
        acc = [0] * len(uniq)
        for j, v in zip(inv.tolist(), w.tolist()):
            acc[j] += v
    else:
        acc = np.zeros(len(uniq), dtype=np.int64)
        np.add.at(acc, inv, w)
        acc = acc.tolist()
    out = {}
    n1 = n2 - 1
    for row, v in zip(uniq.tolist(), acc):
        if v:
            cell = tuple(tuple(row[j * d:(j + 1) * d]) for j in range(n1))
            out[cell] = Fraction(v, den)
    return out


def _transport(coef: StepFunction, g) -> StepFunction:
    # (f.g)(x) = f(g.x) for the odometer, written out directly
    X = coef.space
    N = X.N
    vals = coef.values
    out = []
    for x in range(X.size):
        digits = []
        y = x
        for _ in range(X.d):
            y, r = divmod(y, N)
            digits.append(r)
        digits.reverse()
        moved = 0
        for a, s in zip(digits, g):
            moved = moved * N + (a + s) % N
        out.append(vals[moved])
    return StepFunction(X, out)


def _loop_boundary(b: Chain) -> Dict[tuple, object]:
    kind, k = _targets(b.backend)
    out: Dict[tuple, object] = {}
    for cell, coef in b._terms.items():
        for i in range(len(cell)):
            face = cell[:i] + cell[i + 1:]
            v = coef if i % 2 == 0 else -coef
            if kind != "up":
                g0 = face[0]
                shift = g0 if kind == "full" else tuple(a - a % (k + 1) for a in g0)
                if any(shift):
                    face = tuple(tuple(a - s for a, s in zip(e, shift)) for e in face)
                    if isinstance(v, StepFunction):
                        v = _transport(v, shift)
            out[face] = out[face] + v if face in out else v
    return {c: v for c, v in out.items() if (not v.is_zero() if isinstance(v, StepFunction) else v != 0)}


def boundary_terms(b: Chain) -> Dict[tuple, object]:
    ident = b.backend.id
    if ident.startswith("bar:Z^"):
        if b.ring.space is None:
            return _array_boundary(b)
        return _loop_boundary(b)
    if hasattr(b.backend, "matrix_boundary"):
        return b.backend.matrix_boundary(b)
    raise TypeError(f"no independent boundary for backend {ident}")


def verify_fill(b: Chain, c: Chain) -> bool:
    """``d b == c`` exactly, recomputed independently of the chain backends."""
    if b.degree != c.degree + 1 or b.backend.id != c.backend.id:
        return False
    db = boundary_terms(b)
    target = {cell: (v if isinstance(v, StepFunction) else Fraction(v)) for cell, v in c._terms.items()}
    if b.ring.space is not None and c.ring.space is not None:
        return db == target
    return {cell: Fraction(v) for cell, v in db.items()} == target


def residual(b: Chain, c: Chain) -> Dict[tuple, object]:
    """Terms of ``d b - c`` (empty iff the fill is exact)."""
    db = boundary_terms(b)
    out = dict(db)
    for cell, v in c._terms.items():
        out[cell] = out[cell] - v if cell in out else -v
    return {k: v for k, v in out.items() if (not v.is_zero() if isinstance(v, StepFunction) else v != 0)}
