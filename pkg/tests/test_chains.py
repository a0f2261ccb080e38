from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from folnerfill import QQ, ZZ, Chain, ChainError, MeasuredSet, StepFunction, cross_product, l1_norm, linf, zd
from folnerfill.chains import shuffle_bound, shuffles
from folnerfill.serialize import ParseError, chain_from_json, chain_to_json, dumps, loads

from .conftest import bar_chains

UP1 = zd(1, "up")


def test_norm_of_zero_is_zero():
    assert l1_norm(Chain.zero(UP1, 1, QQ)) == 0


def test_norm_is_sum_of_absolute_coefficients():
    c = Chain(UP1, 1, QQ, [(((0,), (1,)), Fraction(3, 2)), (((0,), (2,)), -2)])
    assert c.norm() == Fraction(7, 2)


def test_step_function_norm_is_uniform_integral():
    X = MeasuredSet("six", 6)
    f = StepFunction.indicator(X, [0, 1]) - StepFunction.indicator(X, [2]) * 3
    c = Chain(UP1, 1, linf(X), [(((0,), (1,)), f)])
    assert c.norm() == Fraction(5, 6)
    assert X.total_measure() == 1


def test_addition_identity_cancellation_distributivity():
    s, t = ((0,), (1,)), ((0,), (2,))
    a = Chain(UP1, 1, ZZ, [(s, 2)])
    assert a + Chain.zero(UP1, 1, ZZ) == a
    assert (a + a.scale(-1)).is_zero()
    x = Chain(UP1, 1, ZZ, [(s, 1), (t, 1)])
    assert x.scale(2) == Chain(UP1, 1, ZZ, [(s, 2), (t, 2)])


def test_reduced_form_merges_equal_cells():
    s = ((0,), (1,))
    c = Chain(UP1, 1, QQ, [(s, Fraction(1, 3)), (s, Fraction(2, 3))])
    assert c.items() == [(s, 1)]


def test_mismatched_degrees_are_rejected():
    with pytest.raises(ChainError):
        Chain(UP1, 1, ZZ, [(((0,), (1,), (2,)), 1)])
    with pytest.raises(ChainError):
        Chain(UP1, 1, ZZ) + Chain(UP1, 2, ZZ)


def test_integer_ring_rejects_fractions():
    with pytest.raises(ChainError):
        Chain(UP1, 1, ZZ, [(((0,), (1,)), Fraction(1, 2))])


@given(bar_chains(), bar_chains())
def test_norm_triangle_inequality(x, y):
    if x.backend is y.backend and x.degree == y.degree:
        assert (x + y).norm() <= x.norm() + y.norm()


@given(bar_chains())
def test_norm_zero_iff_chain_zero(c):
    assert (c.norm() == 0) == c.is_zero()


@given(bar_chains(), st.fractions(min_value=-5, max_value=5, max_denominator=7))
def test_norm_is_homogeneous(c, k):
    assert c.scale(k).norm() == abs(k) * c.norm()


@given(bar_chains(quotient="full"))
def test_serialization_round_trip(c):
    assert chain_from_json(loads(dumps(chain_to_json(c)))) == c


def test_serialization_round_trip_step_functions():
    from folnerfill.groups import Odometer

    X = Odometer(1, 6)
    be = zd(1, "full")
    f = StepFunction(X, [1, 0, -2, 0, 3, 1])
    c = Chain(be, 1, linf(X), [(((0,), (1,)), f)])
    assert chain_from_json(loads(dumps(chain_to_json(c)))) == c


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as e:
        loads('{"backend": \n  1,,}')
    assert e.value.line == 2
    bad = {"backend": "bar:Z^1:full", "degree": 1, "ring": "Q", "terms": [{"cell": [[0], [1]], "coef": "x"}]}
    with pytest.raises(ParseError) as e:
        chain_from_json(bad)
    assert e.value.path == "$.terms[0].coef"


def test_cross_product_with_a_point_embeds():
    G = zd(1, "up")
    x = Chain(G, 0, ZZ, [(((0,),), 1)])
    y = Chain(G, 1, ZZ, [(((0,), (1,)), 2)])
    p = cross_product(x, y)
    assert p.degree == 1 and p.norm() == y.norm()
    assert p.items() == [(((0, 0), (0, 1)), 2)]


def test_cross_product_of_two_edges_has_two_shuffles():
    G = zd(1, "up")
    x = Chain(G, 1, ZZ, [(((0,), (1,)), 1)])
    y = Chain(G, 1, ZZ, [(((0,), (1,)), 1)])
    assert len(cross_product(x, y)) == 2 == shuffle_bound(1, 1)
    assert sorted(s for s, _ in shuffles(1, 1)) == [-1, 1]


@given(bar_chains(d=1, max_terms=3), bar_chains(d=1, max_terms=3))
def test_cross_product_leibniz(x, y):
    if x.degree > 2 or y.degree > 2:
        return
    p, q = x.degree, y.degree
    lhs = cross_product(x, y).boundary() if p + q > 0 else None
    if lhs is None:
        return
    rhs = Chain.zero(lhs.backend, p + q - 1, QQ)
    if p > 0:
        rhs = rhs + cross_product(x.boundary(), y)
    if q > 0:
        rhs = rhs + cross_product(x, y.boundary()).scale((-1) ** p)
    assert lhs == rhs
