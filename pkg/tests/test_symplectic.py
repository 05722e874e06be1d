from collections import Counter
from itertools import product

from hypothesis import given
from hypothesis import strategies as st

from w160.symplectic import (
    FAMILIES,
    SUM_ALPHA,
    alpha,
    alpha_prime,
    brute_counts,
    brute_difference_multiset,
    brute_partition_table,
    cross_mu_triples,
    eta_ij,
    mu_shape,
    o_ij,
    orbit,
    predict_difference_multiset,
    predict_partition_table,
    predicted_counts,
    q0,
    rotate,
    sign_flip,
    v_ij,
    weil_pairing,
)

tors = st.integers(0, 1023)


@given(tors, tors, tors)
def test_weil_pairing_bilinear_alternating(x, y, z):
    assert weil_pairing(x, x) == 0
    assert weil_pairing(x, y) == weil_pairing(y, x)
    assert weil_pairing(x ^ y, z) == weil_pairing(x, z) ^ weil_pairing(y, z)


@given(tors, tors)
def test_q0_refines_pairing(x, y):
    assert q0(x ^ y) ^ q0(x) ^ q0(y) == weil_pairing(x, y)


@given(tors, st.integers(0, 4))
def test_group_action_preserves_pairing(x, k):
    y = 0b1011001101
    assert weil_pairing(rotate(x), rotate(y)) == weil_pairing(x, y)
    assert weil_pairing(sign_flip(x, k), sign_flip(y, k)) == weil_pairing(x, y)


def test_odd_characteristic_count():
    assert sum(q0(c) for c in range(1024)) == 496


def test_v_ij_isotropic_dim4():
    for f in FAMILIES:
        V = v_ij(*f)
        assert len(V) == 16
        assert all(weil_pairing(x, y) == 0 for x, y in product(V, V))


def test_eta_values():
    assert eta_ij(0, 1) == alpha_prime(3)
    assert eta_ij(0, 2) == alpha_prime(4) ^ alpha_prime(1) ^ alpha_prime(3)


def test_odd_translates_are_disjoint():
    sets = [o_ij(*f) for f in FAMILIES]
    assert all(len(s) == 16 for s in sets)
    assert len(set().union(*sets)) == 160


def test_difference_multisets_agree():
    for f1 in FAMILIES:
        for f2 in FAMILIES:
            if f1 <= f2:
                assert predict_difference_multiset(f1, f2) == brute_difference_multiset(f1, f2)


def test_cross_multiset_structure():
    m = predict_difference_multiset((0, 1), (0, 2))
    assert len(m) == 32 and set(m.values()) == {8}


def test_census_tables():
    pred = predict_partition_table()
    assert pred == brute_partition_table()
    rows = sorted((r.shape, r.systems, r.pairs_per_system, r.orbit_size, r.orbits) for r in pred)
    assert rows == [("cross", 480, 24, 40, 12), ("within", 15, 32, 5, 3), ("within", 15, 48, 5, 3)]
    assert predicted_counts() == brute_counts()


def test_differences_avoid_sum_alpha():
    # differences lie in (sum alpha)^perp minus {0, sum alpha}
    diffs = set(predicted_counts())
    assert 0 not in diffs and SUM_ALPHA not in diffs
    assert all(weil_pairing(d, SUM_ALPHA) == 0 for d in diffs)
    assert len(diffs) == 510


def test_cross_triples():
    triples = cross_mu_triples()
    assert len(triples) == 15
    assert all(len(t) == 3 for t in triples)
    assert len(set().union(*triples)) == 45


def test_48_shapes():
    counts = predicted_counts()
    shapes = Counter(mu_shape(mu) for mu, c in counts.items() if c == 48)
    assert set(shapes) == {"within:a_k", "within:a_k+a_k+2", "within:sum-a_k-a_k+1"}


def test_orbit_sizes():
    assert len(orbit(alpha(0))) == 5
    sizes = Counter(len(orbit(mu)) for mu in predicted_counts())
    assert sizes == Counter({5: 30, 40: 480})
