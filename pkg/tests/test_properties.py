"""Property suites that run without the orbit sweep."""

import math
import random

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from w160.certlinalg import IRREP_BASIS, from_irrep, monomial_vector, to_irrep
from w160.exactfield import ONE, ZERO, FieldElem, random_elem
from w160.tangency import gradient_at, perturbation_budget

seeds = st.integers(0, 2**32 - 1)


def _elems(seed, n):
    rng = random.Random(seed)
    return [random_elem(rng) for _ in range(n)]


# -- field axioms ---------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_field_ring_axioms(seed):
    x, y, z = _elems(seed, 3)
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x + ZERO == x and x * ONE == x
    assert x - x == ZERO


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_field_inverse(seed):
    (x,) = _elems(seed, 1)
    if x != ZERO:
        assert x * x.inverse() == ONE


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_embedding_is_a_ring_map(seed):
    from w160.exactfield import embed_float

    x, y = _elems(seed, 2)
    zx, bx = embed_float(x)
    zy, by = embed_float(y)
    zp, _ = embed_float(x * y)
    assert abs(zp - zx * zy) <= 1e-12 * max(1.0, abs(zx) * abs(zy))
    assert bx >= 0 and by >= 0


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_automorphisms_are_multiplicative(seed):
    x, y = _elems(seed, 2)
    assert (x * y).conj_i() == x.conj_i() * y.conj_i()
    assert (x * y).conj_a() == x.conj_a() * y.conj_a()


def test_fieldelem_is_immutable():
    x = FieldElem.rational(1)
    try:
        x.coeffs = (0,) * 8
    except AttributeError:
        return
    raise AssertionError("FieldElem accepted attribute assignment")


# -- Euler relation -------------------------------------------------------------

complex_vec = st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                       min_size=5, max_size=5)
quadric = st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                   min_size=15, max_size=15)


@given(quadric, complex_vec)
def test_euler_relation(q, p):
    q, p = np.array(q), np.array(p)
    value = monomial_vector(p) @ q
    lhs = gradient_at(q, p) @ p
    assert abs(lhs - 2 * value) <= 1e-9 * (1 + np.abs(q).sum() * np.abs(p).max() ** 2)


# -- irrep round trip -----------------------------------------------------------


@given(quadric)
def test_irrep_round_trip(q):
    q = np.array(q)
    assert np.abs(from_irrep(to_irrep(q)) - q).max() <= 1e-14 * max(1.0, np.abs(q).max())


def test_irrep_basis_unitary():
    assert np.abs(IRREP_BASIS @ np.conj(IRREP_BASIS.T) - np.eye(15)).max() <= 1e-14


# -- perturbation budget -----------------------------------------------------------

nonneg = st.floats(0, 1e-6)
norms = st.floats(0, 10)


def test_budget_zero_at_zero():
    assert perturbation_budget(0, 0, 0, 1.7, 1.0) == (0, 0, 0)


@given(nonneg, nonneg, nonneg, norms, norms, st.floats(0, 1e-6), st.integers(0, 2))
def test_budget_monotone(eps, delta, gamma, pn, qn, bump, which):
    args = [eps, delta, gamma]
    base = perturbation_budget(*args, pn, qn)
    args[which] += bump
    grown = perturbation_budget(*args, pn, qn)
    assert all(g >= b for g, b in zip(grown, base))


def test_budget_example():
    b1, _, _ = perturbation_budget(1e-15, 1e-15, 0, 1, 1)
    assert math.isclose(b1, 4.5e-14, rel_tol=1e-6)


# -- orbit representatives ------------------------------------------------------


def test_orbit_representatives_complete():
    from w160.partition import canonical_quad, orbit_representatives

    reps, sizes = orbit_representatives()
    assert int(sizes.sum()) == math.comb(160, 4) == 26294360
    assert all(80 % int(s) == 0 for s in np.unique(sizes))
    assert (np.diff(reps, axis=1) > 0).all()
    rep_set = set(map(tuple, reps.tolist()))
    rng = random.Random(11)
    for _ in range(300):
        q = tuple(sorted(rng.sample(range(160), 4)))
        assert canonical_quad(q) in rep_set
