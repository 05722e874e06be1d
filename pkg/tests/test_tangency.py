import numpy as np
import pytest

from w160.exactfield import embed_float
from w160.partition import certify_quadruple
from w160.tangency import (
    DEFAULT_BANDS,
    PHI,
    Verdict,
    certify_profile,
    gradient_at,
    lagrange_coeffs,
    multiplicity_profile,
    perturbation_budget,
    stage1_vanishing,
    stage2_double,
    stage3_triple,
    tangent_pair,
)
from w160.wiman import exact_q_rows, scaled_point


def _q(i):
    return np.array([embed_float(c)[0] for c in exact_q_rows()[i % 5]])


def _mono(i, k):
    from w160.certlinalg import MONOMIALS

    v = np.zeros(15, dtype=complex)
    v[MONOMIALS.index((min(i, k), max(i, k)))] = 1
    return v


def test_gradient_of_x0x1():
    g = gradient_at(_mono(0, 1), [1, 2, 0, 0, 0])
    assert np.allclose(g, [2, 1, 0, 0, 0])


def test_tangent_pair_first_point():
    p = scaled_point(0)
    fiber, e = tangent_pair(p)
    assert np.allclose(e, np.eye(5)[p.zero_coord])
    assert np.allclose(fiber, p.coords_float)


def test_tangent_directions_kill_i2_gradients():
    for J in (0, 7, 23, 39):
        p = scaled_point(J)
        for v in tangent_pair(p):
            for i in range(5):
                assert abs(gradient_at(_q(i), p.coords_float) @ v) <= 1e-14


def test_lagrange_coefficients_of_generators():
    p = scaled_point(3)
    j = p.zero_coord
    x = p.coords_float
    cases = [(_q(j - 1), (1, 0, 0)), (_q(j), (0, 1, 0)), (_q(j + 1), (0, 0, 1)),
             (_q(j - 1) + PHI * _q(j), (1, PHI, 0))]
    for q, want in cases:
        *lam, resid = lagrange_coeffs(gradient_at(q, x), p)
        assert np.allclose(lam, want, atol=1e-14)
        assert resid <= 1e-14


def test_stage3_values():
    p = scaled_point(5)
    j = p.zero_coord
    inside = stage3_triple(_q(j) + 0.3 * _q(j + 1), p, 0.0)
    assert inside.value <= 1e-14
    assert inside.verdict == Verdict.candidate("kernel-found")
    off = stage3_triple(_mono(j, j), p, 0.0)
    assert off.value == pytest.approx(2.0)
    assert off.verdict == Verdict.non2k(3)


def test_budget_example():
    b1, b2, b3 = perturbation_budget(1e-16, 0.0, 0.0, 1.5, 1.0)
    assert b1 == pytest.approx(4.5e-15)
    assert b2 == pytest.approx(25 * 1e-16)
    assert b3 == pytest.approx(50 * 1e-16)


def test_budget_rejects_negative():
    with pytest.raises(ValueError):
        perturbation_budget(-1, 0, 0, 1, 1)


def test_profile_counts():
    p = multiplicity_profile((0, 23, 80, 123))
    assert p.total == 16
    assert p.triples == [37, 39]
    assert not p.quad_plus
    assert multiplicity_profile((0, 75, 81, 86)).quad_plus


def test_profile_needs_distinct():
    with pytest.raises(ValueError):
        multiplicity_profile((0, 0, 1, 2))


@pytest.mark.parametrize("quad, verdict", [
    ((0, 9, 12, 22), "CertifiedNon2K(1)"),
    ((0, 34, 65, 145), "CertifiedNon2K(1)"),
    ((0, 105, 106, 124), "CertifiedNon2K(2)"),
    ((0, 85, 108, 128), "CertifiedNon2K(2)"),
    ((0, 23, 80, 123), "CertifiedNon2K(3)"),
    ((0, 53, 80, 122), "CertifiedNon2K(3)"),
    ((0, 9, 22, 70), "Candidate(kernel-found)"),
    ((0, 27, 28, 102), "Candidate(kernel-found)"),
])
def test_known_verdicts(quad, verdict):
    assert str(certify_quadruple(quad)) == verdict


def test_trace_records_each_stage():
    trace = []
    certify_profile(multiplicity_profile((0, 23, 80, 123)), trace=trace)
    assert [r.stage for r in trace][:2] == [1, 2]
    assert trace[-1].stage == 3
    for r in trace:
        assert r.max_low <= r.low_top and r.min_high >= r.high_bottom


def test_stage_pipeline_pieces():
    prof = multiplicity_profile((0, 27, 28, 102))
    s1 = stage1_vanishing(prof)
    assert s1.verdict is None and s1.kernel.shape[0] >= 1
    assert s1.delta > 0
    s2 = stage2_double(prof, s1.kernel, s1.delta)
    assert s2.verdict is None
    assert np.linalg.norm(s2.f) == pytest.approx(1.0)
    # f vanishes on every support point
    for J in prof.points:
        x = scaled_point(J).coords_float
        assert abs(x @ gradient_at(s2.f, x)) / 2 <= 1e-13


def test_random_points_have_no_kernel():
    # sixteen generic points impose independent conditions on quadrics mod I2
    rng = np.random.default_rng(3)
    from w160.certlinalg import monomial_matrix, project_out_i2, svd_verified

    P = rng.standard_normal((16, 5)) + 1j * rng.standard_normal((16, 5))
    assert svd_verified(project_out_i2(monomial_matrix(P))).D.min() > DEFAULT_BANDS.stage1.high_min


def test_shared_points_give_double_entries():
    # thetas 0 and 20 share points 8 and 12
    counts = dict(multiplicity_profile((0, 20, 1, 2)).counts)
    assert counts[8] >= 2 and counts[12] >= 2
    assert sum(counts.values()) == 16
