"""Parametrised fillings of integral cycles from a family of towers.

``b_eps = sum_i chi_{A_i} (x) cone(F_i^-1 . d b~) + chi_B (x) b~`` projected
to ``L^oo(X;Z) (x)_{Z Gamma} C_*``; its boundary is c viewed as a chain with
constant coefficient functions.
"""
from __future__ import annotations

from fractions import Fraction

from ..barcomplex import cone, project, translate
from ..chains import ZZ, Chain, ChainError, StepFunction, linf
from ..groups import Lattice, Odometer, ow_towers
from ..oracle.verify import verify_fill
from .certificates import Check, FillCertificate
from .lifting import PreconditionError
from .rational import check_witness, lift_pair, require_bar_full


def tensor(chi: StepFunction, x: Chain) -> Chain:
    """``chi (x) x`` for an integral upstairs chain x."""
    ring = linf(chi.space)
    return Chain._raw(x.backend, x.degree, ring, {cell: chi * v for cell, v in x._terms.items()})


def mixed_fill(c: Chain, b: Chain, X: Odometer, eps, k_cap: int = 64, exact: bool = True) -> FillCertificate:
    eps = Fraction(eps)
    be = require_bar_full(c, "cycle")
    if c.ring != ZZ or b.ring != ZZ:
        raise ChainError("mixed fillings take an integral cycle and witness")
    ring = linf(X)
    c_param = c.as_ring(ring)
    if c.is_zero():
        zero = Chain.zero(be, c.degree + 1, ring)
        return FillCertificate("mixed", c_param, zero, Fraction(0), "c = 0 => b = 0", True,
                               params={"epsilon": eps})
    check_witness(c, b)
    norm_c = c.norm()
    b_up, y, c_up, a_up, data = lift_pair(c, b)
    fam = ow_towers(X, data.S, eps, k_cap=k_cap, exact=exact)

    ones = fam.indicator_sum()
    assembly = all(v == 1 for v in ones)

    total = Chain.zero(b_up.backend, b.degree, ring)
    finer = Fraction(0)
    box = Lattice.standard(X.d)
    neg_S = [X.group.inv(s) for s in data.S]
    tower_rows = []
    for tower in fam.towers:
        F = tower.shape
        b_i = cone(translate(F.inverse(), y))
        chi_A = StepFunction.indicator(X, tower.base)
        total = total + tensor(chi_A, b_i)
        mu_A = Fraction(len(tower.base), X.size)
        dS = box.boundary_size(neg_S, max(max(g) for g in F))
        finer += mu_A * (len(F) * norm_c + data.C * dS)
        tower_rows.append({"box_size": len(F), "base_measure": mu_A, "boundary_size": dS,
                           "filled_norm": b_i.norm(),
                           "filled_bound": len(F) * norm_c + data.C * eps * len(F)})
    chi_B = StepFunction.indicator(X, fam.leftover)
    total = total + tensor(chi_B, b_up)
    b_eps = project(total, "full")

    mu_B = fam.leftover_measure
    bound = norm_c + data.C * eps + mu_B * b_up.norm()
    finer += mu_B * b_up.norm()
    checks = [
        Check("assembly_identity", Fraction(int(assembly)), Fraction(1), "==",
              "sum_i sum_{g in F_i} chi_{g A_i} + chi_B = chi_X"),
        Check("finer_bound", b_eps.norm(), finer, "<=",
              "sum_i mu(A_i)*(|F_i||c| + C|d_S F_i^-1|) + mu(B)|b~|"),
    ]
    for row in tower_rows:
        checks.append(Check("tower_fill", row["filled_norm"], row["filled_bound"], "<=",
                            "|b~_i| <= |F_i||c| + C*eps*|F_i|"))
    return FillCertificate(
        "mixed", c_param, b_eps, bound,
        f"|c| + C*eps + mu(B)*|b~| = {norm_c} + {data.C}*{eps} + {mu_B}*{b_up.norm()} = {bound}",
        verify_fill(b_eps, c_param), checks,
        params={"epsilon": eps, "assembly_identity": assembly, "towers": fam.to_json(),
                "tower_rows": tower_rows, "lifting": data.to_json()})
