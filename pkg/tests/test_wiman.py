from collections import Counter

import numpy as np
import pytest

from w160.exactfield import A, I, ONE, ZERO
from w160.wiman import (
    THETA_TABLE,
    GroupElement,
    ModelError,
    act_on_point,
    act_on_theta,
    all_points,
    decode_point,
    diag_quadrics,
    enumerate_thetas,
    exact_coords,
    find_point,
    generate_theta_sets,
    group_elements,
    group_index,
    group_mul,
    point_permutations,
    scaled_point,
    theta_permutations,
    verify_points_on_curve,
)


def test_decode_first_point():
    p = decode_point(0)
    assert p.coords_exact == (I * A, ONE, I, A, ZERO)
    assert p.zero_coord == 4


def test_decode_rotation():
    # J = 8 is pt_0 rotated right by one
    assert decode_point(8).coords_exact == (ZERO, I * A, ONE, I, A)
    assert decode_point(8).zero_coord == 0


def test_decode_rejects_out_of_range():
    with pytest.raises(ValueError):
        decode_point(40)


def test_points_on_curve():
    rep = verify_points_on_curve()
    assert rep.exact_ok and rep.float_ok, rep.failures
    assert rep.max_float_residual <= 1e-14


def test_points_distinct_projectively():
    for J in range(40):
        assert find_point(exact_coords(J)) == J
        assert find_point(tuple(-c for c in exact_coords(J))) == J


def test_scaled_point_is_proportional():
    for J in range(40):
        p, s = decode_point(J), scaled_point(J)
        assert all(x * A.inverse() == y for x, y in zip(p.coords_exact, s.coords_exact))
        # the coordinate before the zero is 1
        assert s.coords_exact[(s.zero_coord - 1) % 5] == ONE


def test_theta_table_regenerates():
    assert generate_theta_sets() == {frozenset(t) for t in THETA_TABLE}
    assert len(enumerate_thetas()) == 160


def test_families():
    fams = Counter(t.family for t in enumerate_thetas())
    assert len(fams) == 10
    assert set(fams.values()) == {16}


def test_shared_points_example():
    assert set(THETA_TABLE[0]) & set(THETA_TABLE[20]) == {8, 12}


def test_group_order_and_closure():
    G = group_elements()
    assert len(G) == 80 == len(set(G))
    for g in G[:10]:
        for h in G[::7]:
            assert group_mul(g, h) in G


def test_group_inverse():
    e = GroupElement(0, 0)
    for g in group_elements():
        assert group_mul(g, g.inverse()) == e
        assert group_mul(g.inverse(), g) == e


def test_rotation_moves_point_by_eight():
    assert act_on_point(GroupElement(1, 0), 0) == 8


def test_group_mul_matches_composition():
    P = point_permutations()
    G = group_elements()
    rng = np.random.default_rng(3)
    for _ in range(200):
        g, h = G[rng.integers(80)], G[rng.integers(80)]
        gh = group_mul(g, h)
        assert (P[group_index(gh)] == P[group_index(g)][P[group_index(h)]]).all()


def test_theta_permutations_faithful():
    T = theta_permutations()
    assert len({tuple(r) for r in T}) == 80
    for row in T:
        assert sorted(row) == list(range(160))


def test_act_on_theta_maps_points():
    g = GroupElement(2, 0b0110)
    for t in range(0, 160, 13):
        img = act_on_theta(g, t)
        assert set(img.points) == {act_on_point(g, J) for J in THETA_TABLE[t]}


def test_diag_quadrics_in_ideal():
    dq = diag_quadrics()
    for label in ("Q0", "Q1", "Q2", "Q3", "Q4", "Q0'", "Q4'"):
        for p in all_points():
            assert dq[label].eval_exact(p.coords_exact) == ZERO


def test_model_error_type():
    from w160.wiman import family_label

    with pytest.raises(ModelError):
        family_label([0])
