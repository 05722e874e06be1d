import math
from collections import Counter

import numpy as np
import pytest

from w160.partition import (
    EXPECTED_TABLE,
    PartitionError,
    PartitionResult,
    build_partition,
    canonical_quad,
    certify_quadruple,
    crosscheck_f2,
    orbit_representatives,
)
from w160.symplectic import predict_partition_table
from w160.tangency import DEFAULT_BANDS
from w160.wiman import theta_permutations

pytestmark = pytest.mark.sweep


def test_class_count_and_census(partition_result):
    pr = partition_result
    assert len(pr.classes) == 510
    got = sorted((r["pairs_per_class"], r["classes"], r["orbit_size"], r["orbits"]) for r in pr.table)
    assert got == sorted(EXPECTED_TABLE)
    assert Counter(pr.orbit_sizes) == Counter({5: 6, 40: 12})


def test_every_pair_in_one_class(partition_result):
    seen = Counter(p for cl in partition_result.classes for p in cl)
    assert len(seen) == math.comb(160, 2)
    assert set(seen.values()) == {1}


def test_a_size_matches_classes(partition_result):
    pr = partition_result
    assert 3 * pr.a_quads == sum(math.comb(len(cl), 2) for cl in pr.classes)
    assert pr.a_quads == 52280


def test_stage_values_inside_bands(partition_result):
    ext = partition_result.stage_extremes
    assert sorted(ext) == [1, 2, 3]
    for stage, band in ((1, DEFAULT_BANDS.stage1), (2, DEFAULT_BANDS.stage2), (3, DEFAULT_BANDS.stage3)):
        assert ext[stage]["max_low"] <= band.low_max
        assert ext[stage]["min_high"] >= band.high_min


def test_f2_crosscheck(partition_result):
    rep = crosscheck_f2(partition_result)
    assert rep["ok"], rep
    assert rep["cross_family_triples_match"]


def test_predicted_table_agrees(partition_result):
    pred = sorted((r.pairs_per_system, r.systems) for r in predict_partition_table())
    got = sorted((r["pairs_per_class"], r["classes"]) for r in partition_result.table)
    assert pred == got


def test_verdicts_are_g0_invariant(partition_result):
    sw = partition_result.sweep
    perms = theta_permutations()
    rng = np.random.default_rng(11)
    # bias half the samples toward candidates so both outcomes are exercised
    cand = np.nonzero(~sw.certified)[0]
    rows = np.concatenate([rng.integers(0, len(sw.reps), 5000), rng.choice(cand, 5000)])
    for r in rows:
        g = perms[rng.integers(0, len(perms))]
        v = certify_quadruple(g[sw.reps[r]])
        assert v.certified == bool(sw.certified[r])
        if v.certified:
            assert v.stage == sw.stage[r]


def test_quad_from_large_class_is_candidate(partition_result):
    big = next(cl for cl in partition_result.classes if len(cl) == 48)
    assert not certify_quadruple(big[0] + big[1]).certified


def test_round_trip_json(partition_result):
    back = PartitionResult.from_json(partition_result.to_json())
    assert back.classes == partition_result.classes
    assert back.stage_extremes == partition_result.stage_extremes


def test_build_partition_rejects_incomplete(partition_result):
    cl = partition_result.classes[0]
    with pytest.raises(PartitionError):
        build_partition({tuple(sorted(cl[0] + cl[1]))})


def test_canonical_quad_is_orbit_minimum():
    q = (17, 40, 99, 150)
    c = canonical_quad(q)
    perms = theta_permutations()
    for g in perms[::7]:
        assert canonical_quad(g[list(q)]) == c


def test_reps_independent_of_threads():
    r1, s1 = orbit_representatives(threads=1)
    r2, s2 = orbit_representatives()
    assert np.array_equal(r1, r2) and np.array_equal(s1, s2)
    assert len(r1) == 376136
    assert int(s1.sum()) == math.comb(160, 4)
