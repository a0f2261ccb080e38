from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from folnerfill import QQ, ZZ, Chain, ChainError, StepFunction, linf, zd
from folnerfill.barcomplex import act, bar, cone, fill_boundary, full_lift, lift, project, translate
from folnerfill.groups import Odometer

from .conftest import bar_chains, elements

QUOTIENTS = ["up", "full", ("sub", 1), ("sub", 2)]


@st.composite
def quotient_chains(draw, max_degree: int = 4):
    d = draw(st.integers(1, 3))
    n = draw(st.integers(1, max_degree))
    q = draw(st.sampled_from(QUOTIENTS))
    up = draw(bar_chains(d=d, degree=n, quotient="up", max_terms=4))
    return up if q == "up" else project(up, q)


@given(quotient_chains())
def test_boundary_squares_to_zero(c):
    if c.degree >= 2:
        assert c.boundary().boundary().is_zero()


@given(st.integers(2, 12), st.data())
def test_boundary_squares_to_zero_with_step_coefficients(N, data):
    X = Odometer(1, N)
    be = bar(X.group, "up")
    vals = st.lists(st.integers(-2, 2), min_size=N, max_size=N)
    terms = [(tuple(data.draw(elements(1)) for _ in range(3)), StepFunction(X, data.draw(vals)))
             for _ in range(data.draw(st.integers(0, 3)))]
    b = Chain(be, 2, linf(X), terms)
    assert project(b, "full").boundary().boundary().is_zero()
    assert project(b.boundary(), "full") == project(b, "full").boundary()


@given(bar_chains(quotient="up", max_terms=4), elements(2))
def test_boundary_is_equivariant(x, g):
    if x.degree == 0:
        return
    g = g[: x.backend.group.d] + (0,) * (x.backend.group.d - len(g))
    assert act(g, x).boundary() == act(g, x.boundary())


@given(bar_chains(quotient="up", max_terms=4))
def test_cone_fills_cycles(w):
    if w.degree < 2:
        return
    z = w.boundary()
    assert cone(z).boundary() == z


@given(bar_chains(quotient="up"))
def test_cone_has_norm_one(z):
    assert cone(z).norm() <= z.norm()


def test_cone_of_triangle_boundary():
    be = zd(2, "up")
    w = Chain(be, 2, ZZ, [(((0, 0), (1, 0), (1, 1)), 1)])
    z = w.boundary()
    assert cone(z).boundary() == z and cone(z).norm() == z.norm() == 3


def test_fill_boundary_of_cycle_is_zero():
    be = zd(1, "up")
    z = Chain(be, 2, ZZ, [(((0,), (1,), (2,)), 1)]).boundary()
    assert fill_boundary(z).is_zero()


def test_fill_boundary_of_simplex():
    be = zd(1, "up")
    c = Chain(be, 2, ZZ, [(((0,), (1,), (2,)), 1)])
    f = fill_boundary(c)
    assert f.boundary() == c.boundary() and f.norm() <= 3


@given(bar_chains(quotient="up", max_terms=4))
def test_fill_boundary_properties(c):
    if c.degree == 0:
        return
    f = fill_boundary(c)
    assert f.boundary() == c.boundary() and f.norm() <= c.boundary().norm()


@given(bar_chains(quotient="up", max_terms=4), st.sampled_from(QUOTIENTS[1:]))
def test_project_is_norm_decreasing_chain_map(x, q):
    p = project(x, q)
    assert p.norm() <= x.norm()
    if x.degree > 0:
        assert project(x.boundary(), q) == p.boundary()


@given(bar_chains(quotient="up", max_terms=4), elements(2, r=4))
def test_project_is_orbit_invariant(x, g):
    g = (g + (0,))[: x.backend.group.d]
    assert project(act(g, x), "full") == project(x, "full")
    g3 = tuple(3 * a for a in g)
    assert project(act(g3, x), ("sub", 2)) == project(x, ("sub", 2))


@given(bar_chains(quotient="full"))
def test_lift_round_trip(c):
    up = lift(c)
    assert project(up, "full") == c and up.norm() <= c.norm()


def test_projection_to_finer_quotient_is_rejected():
    c = Chain(zd(1, "full"), 1, ZZ, [(((0,), (1,)), 1)])
    with pytest.raises(ChainError):
        project(c, ("sub", 1))


def test_full_lift_trivial_cover():
    c = Chain(zd(1, "full"), 1, ZZ, [(((0,), (1,)), 1)])
    assert project(full_lift(c, 0), "full") == c
    assert full_lift(c, 0).norm() == 1


def test_full_lift_of_generator_over_three_fold_cover():
    c = Chain(zd(1, "full"), 1, ZZ, [(((0,), (1,)), 1)])
    ck = full_lift(c, 2)
    assert len(ck) == 3 and ck.norm() == 3
    assert {cell[0] for cell in ck.cells()} == {(0,), (1,), (2,)}


@given(st.integers(1, 2), st.integers(0, 3), st.data())
def test_full_lift_multiplicativity(d, k, data):
    c = data.draw(bar_chains(d=d, degree=data.draw(st.integers(1, 3)), quotient="full", ring=ZZ, max_terms=4))
    ck = full_lift(c, k)
    assert ck.norm() == (k + 1) ** d * c.norm()
    assert project(ck, "full") == c.scale((k + 1) ** d)
    if c.degree > 1:
        assert full_lift(c.boundary(), k) == ck.boundary()


def test_translate_sums_translates():
    be = zd(1, "up")
    x = Chain(be, 1, ZZ, [(((0,), (1,)), 1)])
    t = translate([(0,), (1,)], x)
    assert t == Chain(be, 1, ZZ, [(((0,), (1,)), 1), (((1,), (2,)), 1)])


def test_degree_zero_has_no_boundary():
    with pytest.raises(ChainError):
        Chain(zd(1, "up"), 0, QQ, [(((0,),), 1)]).boundary()
