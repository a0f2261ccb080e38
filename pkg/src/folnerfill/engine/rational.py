"""Rational fillings with norm at most ``(1+eps)|c|`` by averaging over Folner boxes.

Given a cycle c in ``C_n(Z^d; Q)`` and any witness b with ``d b = c``:

1. lift b to ``b~`` upstairs, put ``y = d b~`` and lift c along y, so that
   ``a~ = y - c~`` is a lift of zero with lifting data (S, C);
2. fill ``F_k . b~`` by coning off its boundary ``F_k . y``;
3. project and divide by ``|F_k|``.

The output depends on b and k only.  ``|b_out| = |F_k . y| / |F_k|``
exactly (the cone is injective on cells and its cells are already
normalized), so the box can be chosen by the achieved norm.
"""
from __future__ import annotations

from dataclasses import replace
from fractions import Fraction
from math import lcm
from typing import Optional

from ..barcomplex import BarBackend, bar, fill_boundary, lift, project, translate
from ..chains import QQ, Chain, ChainError
from ..groups import Lattice, FreeAbelian
from ..oracle.verify import verify_fill
from .certificates import CapExceeded, Check, FillCertificate
from .lifting import BoxConvolver, LiftingData, PreconditionError, anchored_lift, lifting_data

RULES = ("exact", "lifting")


def require_bar_full(c: Chain, what: str) -> BarBackend:
    be = c.backend
    if not isinstance(be, BarBackend) or be.quotient != "full":
        raise ChainError(f"{what} must be a fully normalized bar chain, got {be.id}")
    if not isinstance(be.group, FreeAbelian):
        raise ChainError(f"{what}: the Folner engines are built for Z^d")
    return be


def check_witness(c: Chain, b: Chain) -> None:
    if b.degree != c.degree + 1:
        raise PreconditionError(f"witness has degree {b.degree}, expected {c.degree + 1}")
    if b.backend.id != c.backend.id:
        raise PreconditionError(f"witness lives on {b.backend.id}, cycle on {c.backend.id}")
    if b.boundary() != c:
        raise PreconditionError("witness does not fill the cycle: d b != c")


def lift_pair(c: Chain, b: Chain):
    """``(b~, y = d b~, c~, a~ = y - c~, lifting data)``."""
    b_up = lift(b)
    y = b_up.boundary()
    c_up = anchored_lift(c, y)
    a_up = y - c_up
    return b_up, y, c_up, a_up, lifting_data(a_up)


def cone_cells_from_convolution(conv: BoxConvolver, k: int, divisor: int, ring=QQ) -> dict:
    """Cells of ``cone(F_k . y)`` with coefficients divided by ``divisor``."""
    zero = None
    acc = {}
    den = conv.scale * divisor
    for tau, h, v in conv.terms(k):
        if zero is None:
            zero = (0,) * len(h)
        cell = (zero, h) + tuple(tuple(a + b for a, b in zip(h, e)) for e in tau[1:])
        acc[cell] = Fraction(v, den) if den != 1 else v
    return acc


def common_denominator(*chains: Chain) -> int:
    L = 1
    for x in chains:
        for v in x._terms.values():
            if isinstance(v, Fraction):
                L = lcm(L, v.denominator)
    return L


def select_box(conv: BoxConvolver, data: LiftingData, lattice: Lattice, norm_c: Fraction,
               eps: Fraction, k_cap: int, rule: str, scale: int = 1) -> int:
    """Smallest admissible k; ``conv`` and ``norm_c`` may carry a common factor ``scale``."""
    if rule not in RULES:
        raise ValueError(f"unknown k-selection rule {rule!r}; use one of {RULES}")
    norm_c = norm_c / scale
    target = (1 + eps) * norm_c
    best = None
    kmax = 0 if lattice.rank == 0 else k_cap
    for k in range(kmax + 1):
        size = lattice.box_size(k)
        ratio = lattice.ratio(data.S, k)
        if rule == "lifting":
            value = data.C * ratio
            if value <= eps * norm_c:
                return k
        else:
            value = conv.norm(k) / (size * scale)
            if value <= target:
                return k
        if best is None or value < best[1]:
            best = (k, value)
    what = "C*|d_S F_k|/|F_k|" if rule == "lifting" else "|b_k|/|c|-target"
    raise CapExceeded(f"no box with k <= {kmax} meets the target ({what}); best value {best[1]} at k = {best[0]}",
                      best[0], best[1])


def rational_ubc_fill(c: Chain, b: Chain, eps, k_cap: int = 64, rule: str = "exact",
                      method: str = "array") -> FillCertificate:
    """Fill a rational cycle with norm at most ``(1+eps)|c|`` using the witness b.

    ``method="chain"`` runs the literal chain-level pipeline (translate,
    cone, project, divide); ``"array"`` evaluates the same chain through
    box convolutions and is what large boxes need.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    be = require_bar_full(c, "cycle")
    c = c.as_ring(QQ)
    b = b.as_ring(QQ)
    if c.is_zero():
        zero = Chain.zero(be, c.degree + 1, QQ)
        return FillCertificate("fill", c, zero, Fraction(0), "c = 0 => b = 0", True,
                               params={"epsilon": eps, "k": 0})
    if method not in ("chain", "array"):
        raise ValueError(f"unknown method {method!r}")
    # run on the integral multiples L*c, L*b; the box choice is scale invariant
    L = common_denominator(c, b)
    c_int, b_int = c.scale(L), b.scale(L)
    check_witness(c_int, b_int)
    norm_c = c.norm()
    b_up, y, c_up, a_up, data = lift_pair(c_int, b_int)
    data = replace(data, C=data.C / L, m=data.m / L)
    lattice = data.lattice
    conv = BoxConvolver.build(y, lattice)
    k = select_box(conv, data, lattice, norm_c * L, eps, k_cap, rule, scale=L)
    F = lattice.box(k)
    size = len(F)
    if method == "chain":
        b_k = fill_boundary(translate(F, b_up))
        b_out = project(b_k, "full").scale(Fraction(1, size * L))
    else:
        b_out = Chain._raw(be, c.degree + 1, QQ, cone_cells_from_convolution(conv, k, size * L))
    ratio = lattice.ratio(data.S, k)
    lifting_rhs = data.C * ratio + norm_c
    bound = (1 + eps) * norm_c
    checks = [
        Check("lifting_estimate", b_out.norm(), lifting_rhs, "<=",
              f"|b| <= C*|d_S F_k|/|F_k| + |c| = {data.C}*{ratio} + {norm_c}"),
        Check("target", b_out.norm(), bound, "<=", f"|b| <= (1+eps)*|c| = (1+{eps})*{norm_c}"),
    ]
    if rule == "lifting":
        checks.append(Check("box_rule", data.C * ratio, eps * norm_c, "<=", "C*|d_S F_k|/|F_k| <= eps*|c|"))
    cert = FillCertificate(
        "fill", c, b_out, bound, f"(1+eps)*|c| = (1+{eps})*{norm_c} = {bound}",
        verify_fill(b_out, c), checks,
        params={"epsilon": eps, "k": k, "box_size": size, "ratio": ratio, "rule": rule,
                "lifting": data.to_json(), "witness_norm": b.norm()})
    return cert

