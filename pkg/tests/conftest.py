from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from folnerfill import QQ, ZZ, Chain, zd

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def elements(d: int, r: int = 2):
    return st.tuples(*[st.integers(-r, r) for _ in range(d)])


@st.composite
def bar_chains(draw, d: int = None, degree: int = None, quotient: str = "up", ring=QQ, max_terms: int = 5):
    d = draw(st.integers(1, 3)) if d is None else d
    n = draw(st.integers(0, 3)) if degree is None else degree
    be = zd(d, quotient)
    zero = (0,) * d
    terms = []
    for _ in range(draw(st.integers(0, max_terms))):
        cell = tuple(draw(elements(d)) for _ in range(n + 1))
        if quotient == "full":
            cell = (zero,) + cell[1:]
        if ring == ZZ:
            v = draw(st.integers(-3, 3))
        else:
            v = Fraction(draw(st.integers(-6, 6)), draw(st.integers(1, 4)))
        terms.append((cell, v))
    return Chain(be, n, ring, terms)


@pytest.fixture
def z1_basic():
    from folnerfill.generators import basic_z1

    return basic_z1()
