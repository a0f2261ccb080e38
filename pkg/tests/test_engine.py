from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from folnerfill import QQ, ZZ, Chain, StepFunction, linf, zd
from folnerfill.barcomplex import project
from folnerfill.engine.certificates import CapExceeded
from folnerfill.engine.l1 import completion_fill, l1_decompose, shrink_class, stages_for
from folnerfill.engine.lifting import BoxConvolver, PreconditionError, lifting_data
from folnerfill.engine.mixed import mixed_fill
from folnerfill.engine.parametrised import parametrised_abelian_fill
from folnerfill.engine.rational import lift_pair, rational_ubc_fill
from folnerfill.engine.stable import stable_integral_fill
from folnerfill.generators import (basic_z1, random_lift_of_zero, random_null_homologous, random_parametrised,
                                   random_pure_class)
from folnerfill.groups import Odometer
from folnerfill.oracle.verify import verify_fill

Z1, Z2 = zd(1, "full"), zd(2, "full")


def edge(be, g, v=1):
    d = be.group.d
    return Chain(be, 1, QQ, [(((0,) * d, g), v)])


def constant(ch, X):
    return ch.map_coefficients(lambda v: StepFunction.constant(X, int(v)), linf(X))


def test_lifting_data_of_basic_instance(z1_basic):
    *_, data = lift_pair(z1_basic.cycle, z1_basic.witness)
    assert sorted(data.S) == [(-1,), (0,), (1,)]
    assert (data.C, len(data.K), len(data.S), data.m) == (3, 1, 3, 1)


def test_lifting_data_rejects_non_lift_of_zero():
    up = zd(1, "up")
    with pytest.raises(PreconditionError, match="not a lift of zero"):
        lifting_data(Chain(up, 1, ZZ, [(((0,), (1,)), 1)]))


@given(st.integers(0, 10 ** 6))
@settings(max_examples=25)
def test_lifting_estimate_on_explicit_boxes(seed):
    a = random_lift_of_zero(seed)
    data = lifting_data(a)
    for k in range(4):
        F = data.lattice.box(k)
        from folnerfill.barcomplex import translate

        assert translate(F, a).norm() <= data.bound(F)


@given(st.integers(0, 10 ** 6), st.integers(0, 5))
@settings(max_examples=25)
def test_box_convolution_matches_chain_translate(seed, k):
    from folnerfill.barcomplex import translate

    a = random_lift_of_zero(seed)
    data = lifting_data(a)
    conv = BoxConvolver.build(a, data.lattice)
    assert conv.norm(k) == translate(data.lattice.box(k), a).norm()


def test_rational_fill_basic_instance(z1_basic):
    cert = rational_ubc_fill(z1_basic.cycle, z1_basic.witness, Fraction(1, 10))
    assert cert.verified and cert.params["k"] == 0
    assert (cert.norm_filling, cert.bound) == (3, Fraction(33, 10))


def test_rational_fill_zero_cycle():
    cert = rational_ubc_fill(Chain.zero(Z1, 1, QQ), Chain.zero(Z1, 2, QQ), Fraction(1, 10))
    assert cert.verified and cert.filling.is_zero()


def test_rational_fill_square_commutator():
    # d(1, a, ab) = [b] - [ab] + [a] in the normalized quotient
    b = Chain(Z2, 2, QQ, [(((0, 0), (1, 0), (1, 1)), 1)])
    c = b.boundary()
    cert = rational_ubc_fill(c, b, Fraction(1, 10))
    assert cert.verified and cert.norm_filling == 3 and cert.bound == Fraction(33, 10)


def test_rational_fill_rejects_wrong_witness(z1_basic):
    with pytest.raises(PreconditionError):
        rational_ubc_fill(z1_basic.cycle.scale(2), z1_basic.witness, Fraction(1, 10))


@given(st.integers(0, 10 ** 6), st.integers(1, 3), st.integers(1, 2),
       st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(1, 10)]))
@settings(max_examples=30)
def test_rational_fill_meets_target(seed, d, n, eps):
    inst = random_null_homologous(seed, d, n, ring=QQ)
    cert = rational_ubc_fill(inst.cycle, inst.witness, eps)
    assert cert.verified
    assert cert.norm_filling <= (1 + eps) * inst.cycle.norm()
    assert verify_fill(cert.filling, inst.cycle)


@given(st.integers(0, 10 ** 4))
@settings(max_examples=15)
def test_chain_and_array_methods_agree(seed):
    inst = random_null_homologous(seed, 2, 1, ring=QQ)
    a = rational_ubc_fill(inst.cycle, inst.witness, Fraction(1, 2), method="array")
    b = rational_ubc_fill(inst.cycle, inst.witness, Fraction(1, 2), method="chain")
    assert a.filling == b.filling


def test_stable_fill_basic_instance(z1_basic):
    cert = stable_integral_fill(z1_basic.cycle, z1_basic.witness, 5)
    assert cert.verified and cert.params["d_k"] == 6
    assert (cert.norm_filling, cert.bound, cert.target.norm()) == (18, 24, 18)


@given(st.integers(0, 10 ** 6), st.integers(1, 2), st.integers(0, 4))
@settings(max_examples=25)
def test_stable_fill_properties(seed, d, k):
    inst = random_null_homologous(seed, d, 1)
    cert = stable_integral_fill(inst.cycle, inst.witness, k)
    assert cert.verified
    assert cert.filling.ring == ZZ
    assert cert.params["d_k"] == (k + 1) ** d
    assert project(cert.filling, "full") == project(cert.filling, "full").as_ring(ZZ)


def test_parametrised_fill_constant_coefficients(z1_basic):
    X = Odometer(1, 12)
    cert = parametrised_abelian_fill(constant(z1_basic.cycle, X), constant(z1_basic.witness, X), X, 3)
    assert cert.verified and cert.norm_filling == 3 and cert.bound == Fraction(9, 2)


@given(st.integers(0, 10 ** 6), st.sampled_from([(1, 12), (1, 7), (2, 4)]), st.integers(0, 3))
@settings(max_examples=20)
def test_parametrised_fill_properties(seed, dN, k):
    X = Odometer(*dN)
    if k + 1 > X.N:
        return
    inst = random_parametrised(seed, X)
    cert = parametrised_abelian_fill(inst.cycle, inst.witness, X, k)
    assert cert.verified and verify_fill(cert.filling, inst.cycle)


def test_mixed_fill_basic_instance(z1_basic):
    cert = mixed_fill(z1_basic.cycle, z1_basic.witness, Odometer(1, 12), Fraction(1, 2))
    assert cert.verified and cert.norm_filling == 3 and cert.bound == Fraction(9, 2)


@given(st.integers(0, 10 ** 6), st.sampled_from([Fraction(1, 2), Fraction(1, 4)]))
@settings(max_examples=15)
def test_mixed_fill_properties(seed, eps):
    inst = random_null_homologous(seed, 1, 1)
    cert = mixed_fill(inst.cycle, inst.witness, Odometer(1, 24), eps)
    assert cert.verified


def test_shrink_generator_class():
    res = shrink_class(edge(Z1, (1,)), Fraction(1, 10))
    want = Chain(Z1, 1, QQ, [(((0,), (0,)), Fraction(-1, 20)), (((0,), (20,)), Fraction(1, 20))])
    assert res.cycle == want and res.certificate.params["k"] == 19
    assert res.certificate.verified
    assert verify_fill(res.witness, res.cycle - edge(Z1, (1,)))


@given(st.integers(0, 10 ** 6))
@settings(max_examples=20)
def test_shrink_pure_classes(seed):
    inst = random_pure_class(seed, d=2)
    res = shrink_class(inst.cycle, Fraction(1, 10))
    assert res.certificate.verified and res.cycle.norm() <= Fraction(1, 10)


def test_shrink_cap_exceeded():
    with pytest.raises(CapExceeded) as e:
        shrink_class(edge(Z1, (1,)), Fraction(1, 100), k_cap=10)
    assert e.value.best_k <= 10


def test_stages_for():
    assert stages_for(Fraction(1), Fraction(1, 100)) == 7
    assert stages_for(Fraction(1, 200), Fraction(1, 100)) == 0


def test_completion_generator_class():
    res = completion_fill(edge(Z1, (1,)), Fraction(1, 10), Fraction(1, 100))
    s = res.summary()
    assert s == {"kind": "complete", "norm_cycle": "1", "stages": 7, "K": "11/10", "norm_filling": "255/128",
                 "bound": "22/5", "defect": "1/128", "tolerance": "1/100", "verified": True}


@given(st.integers(0, 10 ** 6))
@settings(max_examples=8)
def test_completion_pure_classes(seed):
    inst = random_pure_class(seed, d=1)
    res = completion_fill(inst.cycle, Fraction(1, 10), Fraction(1, 10))
    assert res.verified
    assert res.filling.norm() <= 4 * res.K * inst.cycle.norm()
    assert verify_fill(res.filling, inst.cycle - res.remainder)


def test_decomposition_of_chunks():
    rng_chunks = [random_null_homologous(s, 1, 2, ring=QQ).witness.scale(Fraction(1, 2 ** s)) for s in range(3)]
    dec = l1_decompose(rng_chunks, Fraction(1, 2))
    assert dec.verified and len(dec.cycles) == 3
    total = sum(dec.cycles[1:], dec.cycles[0])
    s = sum(rng_chunks[1:], rng_chunks[0]).as_ring(QQ)
    assert total == s - dec.corrections[-1]
