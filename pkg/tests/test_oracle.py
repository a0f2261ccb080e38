from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from folnerfill import QQ, Chain, zd
from folnerfill.barcomplex import cone
from folnerfill.engine.rational import rational_ubc_fill
from folnerfill.generators import random_null_homologous
from folnerfill.oracle.complexes import (ComplexError, bar_ball, chain_radius, from_matrix_json,
                                         sphere_triangulation, torus_triangulation)
from folnerfill.oracle.oracle import gap_report, lp_min_fill, small_integral_fill
from folnerfill.oracle.simplex import DualSimplex, PivotLimit
from folnerfill.oracle.verify import residual, verify_fill
from folnerfill.serialize import ParseError

from .conftest import bar_chains

Z1 = zd(1, "full")


def test_zero_cycle_has_zero_filling():
    res = lp_min_fill(Chain.zero(Z1, 1, QQ), bar_ball(1, 1, 1))
    assert res.status == "optimal" and res.value == 0 and res.certified


def test_basic_instance_optimum_is_one(z1_basic):
    res = lp_min_fill(z1_basic.cycle, bar_ball(1, 2, 1))
    assert res.status == "optimal" and res.value == 1 and res.certified
    assert res.filling == Chain(Z1, 2, QQ, [(((0,), (1,), (2,)), 1)])
    assert res.provenance == "bar-ball(2)"


def test_basic_instance_cross_checked_by_enumeration(z1_basic):
    cx = bar_ball(1, 2, 1)
    best = small_integral_fill(z1_basic.cycle, cx, max_norm=1)
    assert best is not None and best.norm() == 1
    assert verify_fill(best, z1_basic.cycle)


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_generator_class_is_infeasible_with_farkas_ray(r):
    c = Chain(Z1, 1, QQ, [(((0,), (1,)), 1)])
    res = lp_min_fill(c, bar_ball(1, r, 1))
    assert res.status == "infeasible" and res.farkas_ok and res.certified


@pytest.mark.parametrize("rule", ["bland", "dantzig"])
def test_pivot_rules_agree(rule):
    inst = random_null_homologous(3, 2, 1, ring=QQ)
    cx = bar_ball(2, chain_radius(inst.cycle), 1, extra=[inst.witness])
    ref = lp_min_fill(inst.cycle, cx)
    res = lp_min_fill(inst.cycle, cx, rule=rule)
    assert res.certified and res.value == ref.value


def test_unsupported_cycle_is_rejected():
    c = Chain(Z1, 1, QQ, [(((0,), (5,)), 1)])
    with pytest.raises(ComplexError):
        lp_min_fill(c, bar_ball(1, 1, 1))


def test_pivot_limit():
    inst = random_null_homologous(7, 2, 2, ring=QQ)
    cx = bar_ball(2, 2, 2, extra=[inst.witness])
    with pytest.raises(PivotLimit):
        lp_min_fill(inst.cycle, cx, max_pivots=0)


@given(st.integers(0, 10 ** 6), st.integers(1, 2), st.integers(1, 2))
@settings(max_examples=25)
def test_lp_soundness_and_exactness(seed, d, n):
    inst = random_null_homologous(seed, d, n, ring=QQ)
    cx = bar_ball(d, chain_radius(inst.cycle), n, extra=[inst.witness])
    res = lp_min_fill(inst.cycle, cx)
    assert res.status == "optimal" and res.certified
    assert res.value <= inst.witness.norm()
    assert not residual(res.filling, inst.cycle)
    cert = rational_ubc_fill(inst.cycle, inst.witness, Fraction(1, 10))
    cx2 = bar_ball(d, chain_radius(inst.cycle), n, extra=[cert.filling])
    assert lp_min_fill(inst.cycle, cx2).value <= cert.norm_filling


@given(st.integers(0, 10 ** 6))
@settings(max_examples=15)
def test_lp_monotone_in_radius(seed):
    inst = random_null_homologous(seed, 1, 1, ring=QQ)
    r0 = chain_radius(inst.witness)
    values = [lp_min_fill(inst.cycle, bar_ball(1, r, 1, extra=[inst.witness])).value for r in range(r0, r0 + 3)]
    assert all(a >= b for a, b in zip(values, values[1:]))


@st.composite
def small_lps(draw):
    m = draw(st.integers(1, 4))
    n = draw(st.integers(1, 6))
    cols = [[(i, draw(st.integers(-2, 2))) for i in range(m)] for _ in range(n)]
    cols = [[(i, v) for i, v in col if v] for col in cols]
    if draw(st.booleans()):
        x = [draw(st.integers(-2, 2)) for _ in range(n)]
        rhs = {i: Fraction(sum(v * x[j] for j, col in enumerate(cols) for r, v in col if r == i)) for i in range(m)}
    else:
        rhs = {i: Fraction(draw(st.integers(-3, 3)), draw(st.integers(1, 3))) for i in range(m)}
    return cols, rhs


@given(small_lps(), st.sampled_from(["bland", "dantzig"]))
@settings(max_examples=150)
def test_dual_simplex_matches_floating_point_reference(lp, rule):
    # floating point HiGHS is used here only as an independent cross-check
    cols, rhs = lp
    m, n = len(rhs), len(cols)
    A = np.zeros((m, n))
    for j, col in enumerate(cols):
        for i, v in col:
            A[i, j] = v
    b = np.array([float(rhs[i]) for i in range(m)])
    ref = linprog(np.ones(2 * n), A_eq=np.hstack([A, -A]), b_eq=b, bounds=(0, None), method="highs")
    sol = DualSimplex(cols, rhs, rule=rule).solve()
    if ref.status == 2:
        assert sol.status == "infeasible"
        y = sol.duals
        assert sum(y.get(i, 0) * rhs[i] for i in range(m)) != 0
        assert all(sum(y.get(i, 0) * v for i, v in col) == 0 for col in cols)
    else:
        assert sol.status == "optimal"
        assert abs(float(sol.value) - ref.fun) < 1e-7
        got = [sum((sol.x.get(q, 0) * (1 if q > 0 else -1) for q in (j + 1, -(j + 1))), Fraction(0))
               for j in range(n)]
        for i in range(m):
            assert sum(v * got[j] for j, col in enumerate(cols) for r, v in col if r == i) == rhs[i]


def test_sphere_triangle_boundary():
    cx = sphere_triangulation(2)
    be = cx.backend
    # edges of the boundary of a tetrahedron, sorted: (0,1),(0,2),(0,3),(1,2),(1,3),(2,3)
    c = Chain(be, 1, QQ, [((1, 3), 1), ((1, 1), -1), ((1, 0), 1)])        # d(0,1,2)
    res = lp_min_fill(c, cx)
    assert res.status == "optimal" and res.value == 1 and res.certified
    assert cx.provenance.startswith("generated triangulation")


def test_torus_meridian_is_not_a_boundary():
    cx = torus_triangulation(3)
    be = cx.backend
    from itertools import combinations

    # the loop 0 -> 3 -> 6 -> 0 around one direction, as edge indices

    tris = set()
    for i in range(3):
        for j in range(3):
            v = lambda a, b: (a % 3) * 3 + (b % 3)
            tris.add(tuple(sorted((v(i, j), v(i + 1, j), v(i + 1, j + 1)))))
            tris.add(tuple(sorted((v(i, j), v(i, j + 1), v(i + 1, j + 1)))))
    all_edges = sorted({e for t in tris for e in combinations(t, 2)})
    index = {e: k for k, e in enumerate(all_edges)}
    loop = Chain(be, 1, QQ, [((1, index[(0, 3)]), 1), ((1, index[(3, 6)]), 1), ((1, index[(0, 6)]), -1)])
    assert loop.boundary().is_zero()
    res = lp_min_fill(loop, cx)
    assert res.status == "infeasible" and res.certified


def test_matrix_input_with_nonzero_dd_is_rejected():
    bad = {"degrees": [1, 1, 1],
           "boundaries": [{"rows": 1, "cols": 1, "entries": [[0, 0, 1]]},
                          {"rows": 1, "cols": 1, "entries": [[0, 0, 1]]}]}
    with pytest.raises(ComplexError, match="boundary of boundary"):
        from_matrix_json(bad)


def test_matrix_input_shape_errors():
    with pytest.raises(ParseError):
        from_matrix_json({"degrees": [2, 1], "boundaries": [{"rows": 3, "cols": 1, "entries": []}]})
    with pytest.raises(ParseError):
        from_matrix_json({"degrees": [2, 1], "boundaries": [{"rows": 2, "cols": 1, "entries": [[5, 0, 1]]}]})


def test_explicit_matrix_fill():
    # an interval: two vertices, one edge; fill the 0-chain v1 - v0
    cx = from_matrix_json({"degrees": [2, 1], "boundaries": [{"rows": 2, "cols": 1,
                                                                "entries": [[0, 0, -1], [1, 0, 1]]}]})
    c = Chain(cx.backend, 0, QQ, [((0, 0), Fraction(-3, 2)), ((0, 1), Fraction(3, 2))])
    res = lp_min_fill(c, cx)
    assert res.value == Fraction(3, 2) and res.certified and res.provenance == "explicit matrix input"


def test_bar_ball_is_closed_under_faces():
    cx = bar_ball(2, 1, 1)
    for cell in cx.cells[2]:
        for f, _ in cx.column(cell):
            assert cx.has_cell(1, f)


def test_verify_fill_examples():
    assert verify_fill(Chain.zero(Z1, 2, QQ), Chain.zero(Z1, 1, QQ))
    b = Chain(Z1, 2, QQ, [(((0,), (1,), (2,)), 1)])
    c = b.boundary()
    assert verify_fill(b, c)
    assert not verify_fill(b, c + Chain(Z1, 1, QQ, [(((0,), (7,)), 1)]))


@given(bar_chains(quotient="up", degree=2, max_terms=4))
def test_verify_fill_cone(w):
    z = w.boundary()
    assert verify_fill(cone(z), z)


def test_gap_report_empty():
    rep = gap_report([])
    assert rep.rows == [] and rep.max_ratio is None


def test_gap_report_basic_instance(z1_basic):
    cert = rational_ubc_fill(z1_basic.cycle, z1_basic.witness, Fraction(1, 10))
    rep = gap_report([cert], bar_ball(1, 2, 1))
    row = rep.rows[0]
    assert (row.algorithm_norm, row.lp_optimum, row.bound) == (3, 1, Fraction(33, 10))
    assert row.ratio == 3 and row.slack == Fraction(3, 10) and not row.flagged


def test_gap_report_shrink_row():
    from folnerfill.engine.l1 import shrink_class

    res = shrink_class(Chain(Z1, 1, QQ, [(((0,), (1,)), 1)]), Fraction(1, 2))
    row = gap_report([res.certificate]).rows[0]
    assert row.status == "optimal" and row.certified and row.slack >= 0
    assert row.lp_optimum <= row.algorithm_norm
