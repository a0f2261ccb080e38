"""Parametrised fillings over a torus odometer, cut along one Rokhlin tower.

Coefficients live in ``L^oo(X;Z)`` for ``X = (Z/N)^d``.  With the tower
``(F_k, A)`` and leftover B, the chain ``F_k^-1 . b~`` is cut into the
pieces ``chi_{gA} . (F_k^-1 . b~)``; the piece with the cheapest boundary
is moved back by its level, coned off and projected, and the leftover is
repaired by the correction term ``sum_j chi_{g0 B} a_j (x) s_j``.
"""
from __future__ import annotations

from fractions import Fraction

from ..barcomplex import BarBackend, act, cone, lift, project, translate
from ..chains import Chain, ChainError, StepFunction
from ..groups import Lattice, FreeAbelian, Odometer, rokhlin_tower
from ..oracle.verify import verify_fill
from .certificates import Check, FillCertificate
from .lifting import PreconditionError, anchored_lift, lifting_data


def cut(x: Chain, chi: StepFunction) -> Chain:
    """Left module action ``chi . x`` on coefficients."""
    return x.map_coefficients(lambda f: chi * f)


def sup_l1(b: Chain) -> Fraction:
    """``|b|_{1,oo} = sum_j |a_j|_oo``."""
    return Fraction(sum(f.sup_norm() for f in b._terms.values()))


def parametrised_abelian_fill(c: Chain, b: Chain, X: Odometer, k: int) -> FillCertificate:
    be = c.backend
    if not isinstance(be, BarBackend) or be.quotient != "full":
        raise ChainError("parametrised fillings take fully normalized bar chains")
    if not isinstance(be.group, FreeAbelian):
        raise ChainError("unsupported: the tower argument needs an abelian group (Z^d)")
    if c.ring.space != X or b.ring.space != X:
        raise ChainError(f"cycle and witness must have L^oo({X.name};Z) coefficients")
    tower = rokhlin_tower(X, k)
    if c.is_zero():
        zero = Chain.zero(be, c.degree + 1, c.ring)
        return FillCertificate("param", c, zero, Fraction(0), "c = 0 => b = 0", True,
                               params={"k": k, "towers": tower.to_json()})
    if b.degree != c.degree + 1 or b.boundary() != c:
        raise PreconditionError("witness does not fill the cycle: d b != c")
    n = c.degree
    group = be.group
    norm_c = c.norm()

    b_up = lift(b)
    y = b_up.boundary()
    c_up = anchored_lift(c, y)
    data = lifting_data(y - c_up)

    F = tower.towers[0].shape
    A = tower.towers[0].base
    B = tower.leftover
    F_inv = F.inverse()
    spread = translate(F_inv, b_up)          # F_k^-1 . b~
    d_spread = spread.boundary()

    pieces = []
    for g in F:  # sorted, so ties go to the smallest element
        chi = StepFunction.indicator(X, X.translate(g, A))
        d_piece = cut(d_spread, chi)
        pieces.append((d_piece.norm(), g, d_piece))
    best_norm, g0, d_best = min(pieces, key=lambda t: t[0])
    average_rhs = (d_spread.norm() + cut(d_spread, StepFunction.indicator(X, B)).norm()) / len(F)

    moved = act(g0, d_best)                  # g0 . d b~_{k,g0}
    b_prime = project(cone(moved), "full")
    chi_B0 = StepFunction.indicator(X, X.translate(g0, B))
    r_k = project(cut(b_up, chi_B0), "full")
    b_out = b_prime + r_k

    box = Lattice.standard(group.d)
    neg_S = [group.inv(s) for s in data.S]
    dS = box.boundary_size(neg_S, k)
    size = len(F)
    mu_B = tower.leftover_measure
    b_sup = sup_l1(b_up)
    bound = data.C * Fraction(dS, size) + norm_c + mu_B * (n + 3) * b_sup
    checks = [
        Check("pigeonhole", best_norm, average_rhs, "<=",
              "|d b~_{k,g0}| <= (|F_k^-1 . d b~| + |chi_B (F_k^-1 . d b~)|)/|F_k|"),
        Check("filled_piece", b_prime.norm(), best_norm, "<=", "|b'| <= |d b~_{k,g0}|"),
        Check("correction", r_k.norm(), mu_B * b_sup, "<=", "|r_k| <= mu(B)*|b~|_{1,oo}"),
    ]
    return FillCertificate(
        "param", c, b_out, bound,
        f"C*|d_S(F_k^-1)|/|F_k| + |c| + mu(B)*(n+3)*|b~|_1,oo = "
        f"{data.C}*{dS}/{size} + {norm_c} + {mu_B}*{n + 3}*{b_sup} = {bound}",
        verify_fill(b_out, c), checks,
        params={"k": k, "gamma0": list(g0), "slack": data.C * Fraction(dS, size),
                "leftover_measure": mu_B, "sup_l1": b_sup, "lifting": data.to_json(),
                "towers": tower.to_json()})
