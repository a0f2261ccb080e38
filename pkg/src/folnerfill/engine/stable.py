"""Integral fillings on the finite covers ``Z^d / ((k+1)Z)^d``.

The box ``F_k = {0..k}^d`` is a set of coset representatives, so
``project_{Gamma_k}(cone(F_k . d b~))`` is an integral chain on the cover
whose boundary is the full lift of c and whose norm is at most
``C |d_S F_k| + d_k |c|``.
"""
from __future__ import annotations

from fractions import Fraction

from ..barcomplex import bar, fill_boundary, full_lift, project, translate
from ..chains import ZZ, Chain, ChainError
from ..groups import Lattice, coset_reps
from ..oracle.verify import verify_fill
from .certificates import Check, FillCertificate
from .lifting import BoxConvolver
from .rational import check_witness, cone_cells_from_convolution, lift_pair, require_bar_full


def stable_integral_fill(c: Chain, b: Chain, k: int, method: str = "array") -> FillCertificate:
    be = require_bar_full(c, "cycle")
    if c.ring != ZZ or b.ring != ZZ:
        raise ChainError("stable fillings need integral cycle and witness")
    if k < 0:
        raise ValueError("k must be non-negative")
    d = be.group.d
    sub, F = coset_reps(d, k)
    cover = bar(be.group, ("sub", k))
    target = full_lift(c, k)
    if c.is_zero():
        zero = Chain.zero(cover, c.degree + 1, ZZ)
        return FillCertificate("stable", c, zero, Fraction(0), "c = 0 => b = 0", True, target=target,
                               params={"k": k, "d_k": sub.index})
    check_witness(c, b)
    norm_c = c.norm()
    b_up, y, c_up, a_up, data = lift_pair(c, b)
    if method == "chain":
        b_k = project(fill_boundary(translate(F, b_up)), ("sub", k))
    else:
        conv = BoxConvolver.build(y, Lattice.standard(d))
        # cone cells start at the identity, which is its own coset representative
        b_k = Chain._raw(cover, c.degree + 1, ZZ, cone_cells_from_convolution(conv, k, 1))
    box = Lattice.standard(d)
    dS = box.boundary_size(data.S, k)
    size = sub.index
    eps_k = data.C * Fraction(dS, size) / norm_c
    bound = data.C * dS + size * norm_c
    boundary_ok = verify_fill(b_k, target)
    pushed = project(target, "full")
    checks = [
        Check("full_lift_norm", target.norm(), size * norm_c, "==", "|c_k| = d_k*|c|"),
        Check("pushdown", Fraction(int(pushed == c.scale(size))), Fraction(1), "==",
              "push-down of the full lift equals d_k*c"),
        Check("stable_bound", b_k.norm(), size * (1 + eps_k) * norm_c, "<=",
              f"|b_k| <= d_k*(1+eps_k)*|c| with eps_k = C*|d_S F_k|/(|F_k|*|c|) = {eps_k}"),
    ]
    return FillCertificate(
        "stable", c, b_k, bound,
        f"|F_k|*(C*|d_S F_k|/|F_k| + |c|) = {size}*({data.C}*{dS}/{size} + {norm_c}) = {bound}",
        boundary_ok, checks, target=target,
        params={"k": k, "d_k": size, "boundary_size": dS, "eps_k": eps_k, "lifting": data.to_json()})
