"""Seeded random instances: null-homologous cycles ``c = d b`` with the witness b kept."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import List, Optional

from .barcomplex import bar, zd
from .chains import QQ, ZZ, Chain, StepFunction, linf
from .groups import FreeAbelian, Odometer


@dataclass
class Instance:
    name: str
    cycle: Chain
    witness: Chain
    seed: int

    def to_json(self) -> dict:
        from .serialize import chain_to_json

        return {"name": self.name, "seed": self.seed, "cycle": chain_to_json(self.cycle),
                "witness": chain_to_json(self.witness)}


def short_elements(d: int, radius: int = 1) -> List[tuple]:
    """Elements of ``Z^d`` with word length at most ``radius``, sorted."""
    return sorted(g for g in product(range(-radius, radius + 1), repeat=d) if sum(map(abs, g)) <= radius)


def random_cell(rng: random.Random, d: int, degree: int, radius: int = 1) -> tuple:
    letters = short_elements(d, radius)
    return ((0,) * d,) + tuple(rng.choice(letters) for _ in range(degree))


def random_chain(rng: random.Random, d: int, degree: int, terms: int, coef_max: int = 2,
                 radius: int = 1, ring=ZZ) -> Chain:
    be = zd(d, "full")
    out = []
    for _ in range(terms):
        v = rng.randint(1, coef_max) * rng.choice((1, -1))
        out.append((random_cell(rng, d, degree, radius), v))
    return Chain(be, degree, ring, out)


def random_null_homologous(seed: int, d: int, degree: int, max_norm: int = 30, terms: Optional[int] = None,
                           coef_max: int = 2, radius: int = 1, ring=ZZ) -> Instance:
    """``c = d b`` for a random witness b of degree ``degree + 1``; retried until ``0 < |c| <= max_norm``."""
    rng = random.Random(f"nullhom:{seed}:{d}:{degree}")
    while True:
        n_terms = terms if terms is not None else rng.randint(1, 4)
        b = random_chain(rng, d, degree + 1, n_terms, coef_max, radius, ring)
        c = b.boundary()
        if c and c.norm() <= max_norm:
            return Instance(f"Z{d}-deg{degree}-seed{seed}", c, b, seed)


def random_lift_of_zero(seed: int, d: int = 2, degree: int = 1, terms: int = 4, coef_max: int = 3,
                        spread: int = 2) -> Chain:
    """Upstairs chain whose projection vanishes: each orbit gets translates with coefficients summing to 0."""
    rng = random.Random(f"liftzero:{seed}:{d}:{degree}")
    up = zd(d, "up")
    out = {}
    for _ in range(terms):
        tau = random_cell(rng, d, degree)
        n = rng.randint(2, 3)
        vals = [rng.randint(1, coef_max) * rng.choice((1, -1)) for _ in range(n - 1)]
        vals.append(-sum(vals))
        for v in vals:
            g = tuple(rng.randint(-spread, spread) for _ in range(d))
            cell = tuple(tuple(a + b for a, b in zip(g, e)) for e in tau)
            out[cell] = out.get(cell, 0) + v
    return Chain(up, degree, ZZ, out.items())


def random_cycle(seed: int, d: int, degree: int = 1, terms: int = 3, coef_max: int = 2, ring=QQ) -> Chain:
    """A random degree-1 chain (every degree-1 chain of the full quotient is a cycle)."""
    if degree != 1:
        raise ValueError("random_cycle builds degree-1 cycles only")
    rng = random.Random(f"cycle:{seed}:{d}")
    while True:
        c = random_chain(rng, d, 1, terms, coef_max, ring=ring)
        if c:
            return c


def random_pure_class(seed: int, d: Optional[int] = None, ring=QQ) -> Instance:
    """``lambda [g]`` for a random non-zero ``g`` with entries in [-3, 3] and a random rational lambda.

    ``d`` is drawn from {1, 2, 3} when not given.  No witness: these are
    cycles whose class is shrunk rather than filled.
    """
    rng = random.Random(f"pure:{seed}:{d}")
    if d is None:
        d = rng.choice((1, 2, 3))
    g = (0,) * d
    while not any(g):
        g = tuple(rng.randint(-3, 3) for _ in range(d))
    lam = Fraction(rng.randint(1, 5), rng.randint(1, 4)) * rng.choice((1, -1))
    c = Chain(zd(d, "full"), 1, ring, [(((0,) * d, g), lam)])
    return Instance(f"Z{d}-pure-seed{seed}", c, None, seed)


def random_step_function(rng: random.Random, X: Odometer, values=(-1, 0, 1, 2)) -> StepFunction:
    return StepFunction(X, [rng.choice(values) for _ in range(X.size)])


def random_parametrised(seed: int, X: Odometer, degree: int = 1, terms: Optional[int] = None,
                        constant: bool = False) -> Instance:
    """Parametrised witness over ``L^oo(X;Z)``; ``constant=True`` uses constant functions only."""
    rng = random.Random(f"param:{seed}:{X.name}:{degree}:{constant}")
    ring = linf(X)
    be = bar(X.group, "full")
    while True:
        n_terms = terms if terms is not None else rng.randint(1, 3)
        out = []
        for _ in range(n_terms):
            cell = random_cell(rng, X.d, degree + 1)
            if constant:
                f = StepFunction.constant(X, rng.randint(1, 2) * rng.choice((1, -1)))
            else:
                f = random_step_function(rng, X)
            out.append((cell, f))
        b = Chain(be, degree + 1, ring, out)
        c = b.boundary()
        if c:
            return Instance(f"{X.name}-deg{degree}-seed{seed}", c, b, seed)


def basic_z1() -> Instance:
    """``c = 2[a] - [a^2] = d (1, a, a^2)`` over Z."""
    be = zd(1, "full")
    b = Chain(be, 2, ZZ, [(((0,), (1,), (2,)), 1)])
    return Instance("z1_basic", b.boundary(), b, 0)
