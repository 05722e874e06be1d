"""Certified test that a sum of four theta characteristics is not 2K.

A 2-canonical divisor of degree 16 is cut by a quadric that is not in
I2(W).  The test looks for such a quadric in three stages, each of which
can only rule it out:

1. vanishing at the distinct support points (SVD kernel, 12-dim quotient),
2. tangency to the curve at every multiple point,
3. second order contact (Lagrangian Hessian) at every point of
   multiplicity three or more.

Only ``Verdict.certified`` carries logical weight.  A candidate verdict
never means "is 2K".
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .certlinalg import (
    IRREP_BASIS,
    KEEP,
    CertificationError,
    GapClassification,
    GapViolation,
    classify_values,
    monomial_matrix,
    project_out_i2,
    svd_verified,
    symmetric_matrix,
)
from .wiman import CurvePoint, THETA_TABLE, scaled_point

__all__ = [
    "Band",
    "Bands",
    "DEFAULT_BANDS",
    "MultiplicityProfile",
    "Verdict",
    "multiplicity_profile",
    "stage1_vanishing",
    "stage2_double",
    "stage3_triple",
    "gradient_at",
    "tangent_pair",
    "lagrange_coeffs",
    "perturbation_budget",
    "certify_profile",
    "point_epsilon",
    "StageRecord",
    "Stage1Result",
    "Stage2Result",
    "Stage3Result",
]

PHI = (1 + 5**0.5) / 2
UNIT_ROUNDOFF = 2.0**-53
LAGRANGE_CONSISTENCY_TOL = 1e-10


@dataclass(frozen=True)
class Band:
    low_max: float
    high_min: float
    high_max: float

    def as_list(self) -> list[float]:
        return [self.low_max, self.high_min, self.high_max]


@dataclass(frozen=True)
class Bands:
    stage1: Band = Band(1e-14, 1e-2, 1e3)
    stage2: Band = Band(1e-13, 1e-2, 10.0)
    stage3: Band = Band(1e-14, 1e-2, 10.0)
    span: Band = Band(1e-14, 1e-2, 10.0)

    def to_json(self) -> dict:
        return {k: getattr(self, k).as_list() for k in ("stage1", "stage2", "stage3", "span")}


DEFAULT_BANDS = Bands()


@dataclass(frozen=True)
class Verdict:
    certified: bool
    stage: int | None = None
    reason: str | None = None

    @classmethod
    def non2k(cls, stage: int) -> "Verdict":
        return cls(True, stage, None)

    @classmethod
    def candidate(cls, reason: str) -> "Verdict":
        return cls(False, None, reason)

    def __str__(self):
        return f"CertifiedNon2K({self.stage})" if self.certified else f"Candidate({self.reason})"


@dataclass(frozen=True)
class MultiplicityProfile:
    counts: tuple[tuple[int, int], ...]  # (point index, multiplicity), sorted by point

    @property
    def points(self) -> list[int]:
        return [p for p, _ in self.counts]

    @property
    def n(self) -> int:
        return len(self.counts)

    @property
    def multiple(self) -> list[int]:
        return [p for p, m in self.counts if m >= 2]

    @property
    def n2(self) -> int:
        return len(self.multiple)

    @property
    def triples(self) -> list[int]:
        return [p for p, m in self.counts if m >= 3]

    @property
    def quad_plus(self) -> bool:
        return any(m >= 4 for _, m in self.counts)

    @property
    def total(self) -> int:
        return sum(m for _, m in self.counts)


def multiplicity_profile(quad: Sequence[int]) -> MultiplicityProfile:
    """Tally the 16 support points of four theta characteristics."""
    if len(set(quad)) != 4:
        raise ValueError("need four distinct theta characteristics")
    tally = Counter(J for t in quad for J in THETA_TABLE[t])
    return MultiplicityProfile(tuple(sorted(tally.items())))


# -- error budgets -------------------------------------------------------------


def perturbation_budget(eps: float, delta: float, gamma: float, p_norm: float, q_norm: float):
    """Worst-case size of the stage-1/2/3 quantities for a genuinely 2K divisor.

    ``eps`` bounds the point error, ``delta`` the quadric error and ``gamma``
    the error in the Lagrange coefficients.
    """
    if any(np.any(np.asarray(v) < 0) for v in (eps, delta, gamma, p_norm, q_norm)):
        raise ValueError("budget arguments must be nonnegative")
    # expanded so that tiny eps, delta do not cancel catastrophically
    b1 = 15 * ((2 * p_norm * eps + eps * eps) * (q_norm + delta) + p_norm**2 * delta)
    lin = p_norm * delta + eps * q_norm + eps * delta
    b2 = 25 * lin
    b3 = 2 * delta + 6 * PHI * gamma + 50 * lin
    return b1, b2, b3


def point_epsilon(p: CurvePoint) -> float:
    """Bound on the 2-norm distance between the float and exact representatives."""
    return float(np.sqrt(np.sum(p.coord_bounds**2)))


def _rounding(p_norm: float, terms: int = 15) -> float:
    # accumulated rounding of a length-``terms`` product/sum chain over values of size p_norm^2
    return 2 * terms * UNIT_ROUNDOFF * np.maximum(p_norm, 1.0) ** 2


# -- stage 1 -------------------------------------------------------------------


@dataclass
class Stage1Result:
    verdict: Verdict | None
    kernel: np.ndarray  # (k1, 15) monomial-basis quadrics, orthonormal rows
    classification: GapClassification | None
    budget: float
    delta: float
    singular_values: np.ndarray = field(repr=False)


def stage1_vanishing(profile: MultiplicityProfile, bands: Bands = DEFAULT_BANDS) -> Stage1Result:
    pts = [scaled_point(J) for J in profile.points]
    P = np.array([p.coords_float for p in pts])
    M = project_out_i2(monomial_matrix(P))
    svd = svd_verified(M)
    p_norm = max(p.norm for p in pts)
    eps = max(point_epsilon(p) for p in pts)
    row_err = perturbation_budget(eps, 0.0, 0.0, p_norm, 1.0)[0] + _rounding(p_norm)
    budget = np.sqrt(len(pts)) * row_err
    band = bands.stage1
    try:
        cls = classify_values(svd.D, band.low_max, band.high_min, band.high_max,
                              svd.spectral_perturbation, budget)
    except GapViolation:
        return Stage1Result(Verdict.candidate("gap-violation"), np.zeros((0, 15)), None, budget, 0.0, svd.D)
    k1 = M.shape[1] - cls.k_high
    if k1 == 0:
        return Stage1Result(Verdict.non2k(1), np.zeros((0, 15)), cls, budget, 0.0, svd.D)
    Y = svd.kernel_basis(k1)  # (12, k1)
    kernel = (IRREP_BASIS[:, KEEP] @ Y).T
    # sin-theta bound on the computed kernel against the exact one
    gap = cls.min_high - svd.spectral_perturbation if cls.k_high else 1.0
    delta = 2 * (budget + svd.spectral_perturbation) / gap + _rounding(1.0)
    return Stage1Result(None, kernel, cls, budget, delta, svd.D)


# -- stage 2 -------------------------------------------------------------------


def gradient_at(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Gradient of the quadric ``q`` (monomial basis) at ``p``."""
    return 2 * symmetric_matrix(np.asarray(q, dtype=complex)) @ np.asarray(p, dtype=complex)


def tangent_pair(p: CurvePoint) -> tuple[np.ndarray, np.ndarray]:
    """Fiber direction and the coordinate direction of the zero coordinate.

    Both are annihilated by the gradients of every diagonal quadric at ``p``
    under the bilinear (unconjugated) product.
    """
    e = np.zeros(5, dtype=complex)
    e[p.zero_coord] = 1.0
    return p.coords_float.copy(), e


@dataclass
class Stage2Result:
    verdict: Verdict | None
    f: np.ndarray | None
    classification: GapClassification | None
    budget: float
    delta: float


def stage2_double(profile: MultiplicityProfile, kernel: np.ndarray, delta1: float,
                  bands: Bands = DEFAULT_BANDS) -> Stage2Result:
    k1 = kernel.shape[0]
    if k1 == 0 or profile.n2 == 0:
        raise ValueError("stage 2 needs a kernel and at least one multiple point")
    rows = []
    pts = [scaled_point(J) for J in profile.multiple]
    for p in pts:
        grads = np.array([gradient_at(q, p.coords_float) for q in kernel])  # (k1, 5)
        for v in tangent_pair(p):
            rows.append(grads @ v)
    M2 = np.array(rows)
    svd = svd_verified(M2)
    p_norm = max(p.norm for p in pts)
    eps = max(point_epsilon(p) for p in pts)
    entry = perturbation_budget(eps, delta1, 0.0, p_norm, 1.0)[1] + _rounding(p_norm)
    budget = np.sqrt(M2.shape[0]) * entry
    band = bands.stage2
    try:
        cls = classify_values(svd.D, band.low_max, band.high_min, band.high_max,
                              svd.spectral_perturbation, budget)
    except GapViolation:
        return Stage2Result(Verdict.candidate("gap-violation"), None, None, budget, delta1)
    k_low = k1 - cls.k_high
    if k_low == 0:
        return Stage2Result(Verdict.non2k(2), None, cls, budget, delta1)
    if k_low > 1:
        return Stage2Result(Verdict.candidate("kernel-dim>1"), None, cls, budget, delta1)
    lam = svd.kernel_basis(1)[:, 0]
    f = lam @ kernel
    gap = cls.min_high - svd.spectral_perturbation if cls.k_high else 1.0
    delta2 = delta1 + 2 * (budget + svd.spectral_perturbation) / gap + _rounding(1.0)
    return Stage2Result(None, f, cls, budget, delta2)


# -- stage 3 -------------------------------------------------------------------


def lagrange_coeffs(grad_f: np.ndarray, p: CurvePoint) -> tuple[complex, complex, complex, float]:
    """Coefficients of ``grad f`` on the gradients of Q_{j-1}, Q_j, Q_{j+1} at ``p``.

    The middle coefficient is solved from both neighbouring coordinates; the
    returned value is their mean and the last entry their disagreement.
    """
    j = p.zero_coord
    x = p.coords_float
    g = np.asarray(grad_f)
    jm2, jm1, jp1, jp2 = (j - 2) % 5, (j - 1) % 5, (j + 1) % 5, (j + 2) % 5
    lam0 = g[jm2] / (2 * x[jm2])
    lam2 = g[jp2] / (2 * x[jp2])
    lam1_left = g[jm1] / (2 * x[jm1]) - PHI * lam0
    lam1_right = g[jp1] / (2 * x[jp1]) - PHI * lam2
    return complex(lam0), complex((lam1_left + lam1_right) / 2), complex(lam2), float(abs(lam1_left - lam1_right))


@dataclass
class Stage3Result:
    verdict: Verdict | None
    value: float
    residual: float
    budget: float


def stage3_triple(f: np.ndarray, p: CurvePoint, delta2: float, grad_err: float = 0.0,
                  bands: Bands = DEFAULT_BANDS) -> Stage3Result:
    """Second order contact test of ``f`` with the curve at ``p``.

    Returns a certified verdict when the Hessian entry is bounded away from
    zero, a candidate when it is numerically zero, and ``verdict=None``
    never: stage 3 is the last stage.
    """
    j = p.zero_coord
    lam0, lam1, lam2, resid = lagrange_coeffs(gradient_at(f, p.coords_float), p)
    fjj = f[_diag_index(j)]
    value = abs(2 * (fjj - lam0 - PHI * lam1 - lam2))
    min_coord = float(np.min(np.abs(np.delete(p.coords_float, j))))
    gamma = resid + (1 + PHI) * grad_err / (2 * min_coord) + _rounding(1.0, 8)
    eps = point_epsilon(p)
    budget = perturbation_budget(eps, delta2, gamma, p.norm, 1.0)[2]
    if resid > LAGRANGE_CONSISTENCY_TOL:
        return Stage3Result(Verdict.candidate("lagrange-inconsistent"), value, resid, budget)
    band = bands.stage3
    try:
        cls = classify_values([value], band.low_max, band.high_min, band.high_max, 0.0, budget)
    except GapViolation:
        return Stage3Result(Verdict.candidate("gap-violation"), value, resid, budget)
    if cls.k_high:
        return Stage3Result(Verdict.non2k(3), value, resid, budget)
    return Stage3Result(Verdict.candidate("kernel-found"), value, resid, budget)


def _diag_index(j: int) -> int:
    from .certlinalg import MONOMIALS

    return MONOMIALS.index((j, j))


# -- pipeline -------------------------------------------------------------------


@dataclass(frozen=True)
class StageRecord:
    """Where one stage's values fell relative to the inflated bands."""

    stage: int
    max_low: float
    min_high: float
    low_top: float
    high_bottom: float


def _record(trace, stage, cls: GapClassification | None):
    if trace is not None and cls is not None:
        trace.append(StageRecord(stage, cls.max_low, cls.min_high, cls.low_top, cls.high_bottom))


def certify_profile(profile: MultiplicityProfile, bands: Bands = DEFAULT_BANDS,
                    trace: list | None = None) -> Verdict:
    """Run stages 1 to 3 on one divisor.

    Points of multiplicity four or more get the triple-contact test, which
    is a necessary condition for them as well.  When ``trace`` is a list,
    one ``StageRecord`` per classified stage is appended to it.
    """
    try:
        s1 = stage1_vanishing(profile, bands)
        _record(trace, 1, s1.classification)
        if s1.verdict is not None:
            return s1.verdict
        if profile.n2 == 0:
            return Verdict.candidate("kernel-found")
        s2 = stage2_double(profile, s1.kernel, s1.delta, bands)
        _record(trace, 2, s2.classification)
        if s2.verdict is not None:
            return s2.verdict
        reason = "mult>=4" if profile.quad_plus else "kernel-found"
        for J in profile.triples:
            s3 = stage3_triple(s2.f, scaled_point(J), s2.delta, s2.budget, bands)
            if trace is not None:
                high = s3.value > s3.budget + bands.stage3.low_max
                trace.append(StageRecord(3, 0.0 if high else s3.value, s3.value if high else float("inf"),
                                         bands.stage3.low_max + s3.budget, bands.stage3.high_min))
            if s3.verdict.certified:
                return s3.verdict
            if s3.verdict.reason != "kernel-found":
                reason = s3.verdict.reason
        return Verdict.candidate(reason)
    except CertificationError:
        return Verdict.candidate("gap-violation")
