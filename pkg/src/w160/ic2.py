"""Recover I2(W) from products of theta hyperplanes.

For each Steiner class the pair quadrics ``l_t * l_t'`` span a subspace of
the 15-dimensional space of quadrics.  On half of the size-40 orbits the
span is 13-dimensional; the union of the 2-dimensional orthogonal
complements fills R1 + R2 + R5, so the intersection of the spans is
R3 + R4 = span(Q_A, Q_B, Q_C).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cache
from typing import Sequence

import numpy as np

from .certlinalg import (
    BLOCKS,
    IRREP_BASIS,
    MONOMIALS,
    CertificationError,
    classify_gap,
    quadric_action,
    svd_verified,
    symmetric_matrix,
)
from .tangency import DEFAULT_BANDS, Band, Bands
from .wiman import decode_point, diag_quadrics, group_elements, point_matrix, theta_permutations, thetas

__all__ = [
    "ThetaHyperplane",
    "SteinerSpanReport",
    "IntersectionCertificate",
    "Ic2Error",
    "theta_hyperplane",
    "all_hyperplanes",
    "pair_quadric",
    "steiner_span",
    "intersect_and_certify",
    "reconstruct_check",
    "curve_samples",
    "equivariance_check",
    "ic2_report",
]

HYPERPLANE_TOL = 1e-13
PAIR_TOL = 1e-12
MATCH_TOL = 1e-12
BLOCK_RANGE = (0.3, 1.0)
I2_LEAK_TOL = 1e-13


class Ic2Error(CertificationError):
    """A step of the I2 reconstruction failed its certificate."""


# -- hyperplanes ----------------------------------------------------------------


@dataclass(frozen=True)
class ThetaHyperplane:
    theta: int
    coeffs: np.ndarray = field(repr=False)
    point_residual: float
    tangent_residual: float

    def __call__(self, x) -> complex:
        return complex(np.asarray(x) @ self.coeffs)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def theta_hyperplane(t: int) -> ThetaHyperplane:
    """Kernel of the 4x5 coordinate matrix of the theta's points.

    Also checked: the hyperplane contains the tangent line at each point,
    i.e. its coefficient at that point's zero coordinate vanishes.
    """
    return _hyperplane_cached(int(t))


@cache
def _hyperplane_cached(t: int) -> ThetaHyperplane:
    th = thetas()[t]
    P = point_matrix()[list(th.points)]
    svd = svd_verified(P)
    cls = classify_gap(svd, 1e-14, 1e-2, 10.0)
    if cls.k_high != 4:
        raise Ic2Error(f"theta {t}: points span {cls.k_high} dimensions, expected 4")
    l = _fix_phase(svd.kernel_basis(1)[:, 0])
    point_res = float(np.abs(P @ l).max())
    tangent_res = float(max(abs(l[decode_point(J).zero_coord]) for J in th.points))
    if point_res > HYPERPLANE_TOL or tangent_res > HYPERPLANE_TOL:
        raise Ic2Error(f"theta {t}: hyperplane residuals {point_res:.2g}, {tangent_res:.2g}")
    return ThetaHyperplane(t, l, point_res, tangent_res)


@cache
def all_hyperplanes() -> np.ndarray:
    """160 x 5 array of normalized hyperplane coefficients."""
    return np.array([theta_hyperplane(t).coeffs for t in range(len(thetas()))])


def pair_quadric(l1, l2) -> np.ndarray:
    """Unit-normalized coefficients of the product of two linear forms."""
    l1 = getattr(l1, "coeffs", l1)
    l2 = getattr(l2, "coeffs", l2)
    l1, l2 = np.asarray(l1, dtype=complex), np.asarray(l2, dtype=complex)
    q = np.array([l1[i] * l2[k] if i == k else l1[i] * l2[k] + l1[k] * l2[i] for i, k in MONOMIALS])
    return q / np.linalg.norm(q)


# -- spans ------------------------------------------------------------------


@dataclass
class SteinerSpanReport:
    class_id: int
    pairs: int
    span_dim: int | None
    complement: np.ndarray | None = field(repr=False)  # (15, 15 - dim) monomial coordinates
    block_norms: dict[str, float] = field(default_factory=dict)
    singular_values: list[float] = field(default_factory=list, repr=False)
    max_low: float = 0.0
    min_high: float = float("inf")
    usable: bool = True
    note: str = ""

    def to_json(self) -> dict:
        return {
            "class_id": self.class_id,
            "pairs": self.pairs,
            "span_dim": self.span_dim,
            "block_norms": self.block_norms,
            "max_low": self.max_low,
            "min_high": self.min_high,
            "usable": self.usable,
            "note": self.note,
        }


def block_projection_norms(C: np.ndarray) -> dict[str, float]:
    """Largest projection length of a unit vector of span(C) onto each irrep block."""
    Y = np.conj(IRREP_BASIS.T) @ C  # irrep coordinates, columns
    return {name: float(np.linalg.norm(Y[sl], 2)) if C.shape[1] else 0.0 for name, sl in BLOCKS.items()}


def steiner_span(class_id: int, pairs: Sequence[tuple[int, int]], band: Band | None = None) -> SteinerSpanReport:
    """Dimension and orthogonal complement of the span of a class's pair quadrics."""
    band = band or DEFAULT_BANDS.span
    L = all_hyperplanes()
    Q = np.array([pair_quadric(L[a], L[b]) for a, b in pairs])
    try:
        # v is orthogonal to every row q (Hermitian) iff conj(Q) v = 0
        svd = svd_verified(np.conj(Q))
        cls = classify_gap(svd, band.low_max, band.high_min, band.high_max)
    except CertificationError as e:
        return SteinerSpanReport(class_id, len(pairs), None, None, usable=False, note=str(e))
    dim = cls.k_high
    C = svd.kernel_basis(15 - dim)
    rep = SteinerSpanReport(class_id, len(pairs), dim, C, block_projection_norms(C),
                            [float(s) for s in svd.D], cls.max_low, cls.min_high)
    # every pair quadric must lie in the span it generated
    if dim < 15 and np.abs(np.conj(Q) @ C).max() > PAIR_TOL:
        rep.usable, rep.note = False, "pair quadric outside computed span"
    return rep


# -- intersection -----------------------------------------------------------


@dataclass
class IntersectionCertificate:
    classes_used: list[int]
    complement_rank: int
    complement_min_high: float
    basis: np.ndarray = field(repr=False)  # (15, 3) orthonormal, monomial coordinates
    match_residual: float
    point_residual: float
    ok: bool

    def to_json(self) -> dict:
        return {
            "classes_used": len(self.classes_used),
            "complement_rank": self.complement_rank,
            "complement_min_high": self.complement_min_high,
            "intersection_dim": int(self.basis.shape[1]),
            "match_residual": self.match_residual,
            "point_residual": self.point_residual,
            "basis": [[[float(z.real), float(z.imag)] for z in col] for col in self.basis.T],
            "ok": self.ok,
        }


def i2_basis() -> np.ndarray:
    """Orthonormal basis (columns) of span(Q_A, Q_B, Q_C)."""
    dq = diag_quadrics()
    M = np.array([dq[k].float_coeffs() for k in ("A", "B", "C")]).T  # 5 x 3 diagonal coefficients
    Q = np.zeros((15, 3), dtype=complex)
    for j in range(5):
        Q[MONOMIALS.index((j, j))] = M[j]
    u, _, _ = np.linalg.svd(Q, full_matrices=False)
    return u


def subspace_residual(X: np.ndarray, Y: np.ndarray) -> float:
    """max of the two one-sided distances between column spaces (orthonormal inputs)."""
    rx = np.linalg.norm(X - Y @ (np.conj(Y.T) @ X), 2)
    ry = np.linalg.norm(Y - X @ (np.conj(X.T) @ Y), 2)
    return float(max(rx, ry))


def intersect_and_certify(reports: Sequence[SteinerSpanReport], band: Band | None = None) -> IntersectionCertificate:
    band = band or DEFAULT_BANDS.span
    used = [r for r in reports if r.usable and r.span_dim == 13]
    if not used:
        raise Ic2Error("no class with a 13-dimensional span")
    Call = np.concatenate([r.complement for r in used], axis=1)  # 15 x 2m
    svd = svd_verified(np.conj(Call.T))
    cls = classify_gap(svd, band.low_max, band.high_min, max(band.high_max, float(np.sqrt(Call.shape[1])) + 1))
    rank = cls.k_high
    X = svd.kernel_basis(15 - rank)
    Q = i2_basis()
    match = subspace_residual(X, Q) if X.shape[1] == 3 else float("inf")
    pts = point_matrix()
    vals = [abs(_eval_quadric(X[:, k], p)) for k in range(X.shape[1]) for p in pts]
    point_res = float(max(vals)) if vals else float("inf")
    ok = rank == 12 and X.shape[1] == 3 and match <= MATCH_TOL and point_res <= PAIR_TOL
    return IntersectionCertificate([r.class_id for r in used], rank, cls.min_high, X, match, point_res, ok)


def _eval_quadric(q: np.ndarray, p: np.ndarray) -> complex:
    return complex(p @ symmetric_matrix(q) @ p)


# -- sanity checks ------------------------------------------------------------


def curve_samples(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random unit-norm points of W.

    The defining quadrics are linear in the squares y_j = x_j^2, so a point
    of W is a square root of a vector in the 2-dimensional solution space.
    """
    dq = diag_quadrics()
    M = np.array([dq[k].float_coeffs() for k in ("A", "B", "C")])
    _, _, vh = np.linalg.svd(M)
    K = np.conj(vh[3:]).T  # 5 x 2 null space
    out = []
    for _ in range(n):
        c = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        y = K @ c
        x = np.sqrt(y) * np.where(rng.random(5) < 0.5, -1, 1)
        out.append(x / np.linalg.norm(x))
    return np.array(out)


def reconstruct_check(cert: IntersectionCertificate, samples: int = 100, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    X = cert.basis
    pts = point_matrix()
    special = max(abs(_eval_quadric(X[:, k], p / np.linalg.norm(p))) for k in range(3) for p in pts)
    cs = curve_samples(samples, rng)
    continued = max(abs(_eval_quadric(X[:, k], p)) for k in range(3) for p in cs)
    off = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    off /= np.linalg.norm(off)
    off_curve = max(abs(_eval_quadric(X[:, k], off)) for k in range(3))
    return {
        "special_points_residual": float(special),
        "sample_points": samples,
        "sample_points_residual": float(continued),
        "off_curve_residual": float(off_curve),
        "ok": bool(special <= 1e-12 and continued <= 1e-8 and off_curve >= 1e-2),
    }


def equivariance_check(classes: Sequence[Sequence[tuple[int, int]]], class_orbit: Sequence[int],
                       reports: dict[int, SteinerSpanReport]) -> float:
    """Worst distance between ``g`` applied to a complement and the complement of the image class.

    Returns ``inf`` if two classes of one orbit have different span dimensions.
    """
    perms = theta_permutations()
    elems = group_elements()
    key = {tuple(sorted(cl))[0]: c for c, cl in enumerate(classes)}
    first: dict[int, int] = {}
    worst = 0.0
    for c, o in enumerate(class_orbit):
        first.setdefault(o, c)
    for o, c0 in first.items():
        r0 = reports[c0]
        for gi, g in enumerate(elems):
            img = sorted(tuple(sorted((int(perms[gi, a]), int(perms[gi, b])))) for a, b in classes[c0])
            r1 = reports[key[img[0]]]
            if r1.span_dim != r0.span_dim:
                return float("inf")
            if r0.complement is None or r0.complement.shape[1] == 0:
                continue
            T = quadric_action(g.r, g.s)
            worst = max(worst, subspace_residual(_orthonormal(T @ r0.complement), r1.complement))
    return worst


def _orthonormal(X: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(X)
    return q


def ic2_report(classes: Sequence[Sequence[tuple[int, int]]], class_orbit: Sequence[int],
               bands: Bands = DEFAULT_BANDS) -> dict:
    """Everything ic2_report.json carries; ``ok`` is the certification verdict."""
    reports = {c: steiner_span(c, cl, bands.span) for c, cl in enumerate(classes)}
    cert = intersect_and_certify(list(reports.values()), bands.span)
    recon = reconstruct_check(cert)
    eq = equivariance_check(classes, class_orbit, reports)
    dims: dict[int, set] = {}
    for c, r in reports.items():
        dims.setdefault(class_orbit[c], set()).add(r.span_dim)
    good = sorted(o for o, d in dims.items() if d == {13})
    good_reports = [r for r in reports.values() if r.span_dim == 13]
    lo, hi = BLOCK_RANGE
    blocks_ok = all(
        lo <= r.block_norms[b] <= hi for r in good_reports for b in ("R1", "R2", "R5")
    ) and all(r.block_norms[b] <= I2_LEAK_TOL for r in good_reports for b in ("R3", "R4"))
    max_dim = max((r.span_dim or 0) for r in reports.values())
    return {
        "classes": [r.to_json() for r in reports.values()],
        "dim13_classes": len(good_reports),
        "dim13_orbits": good,
        "max_span_dim": max_dim,
        "block_checks_ok": blocks_ok,
        "equivariance_residual": eq,
        "intersection": cert.to_json(),
        "reconstruction": recon,
        "ok": bool(cert.ok and recon["ok"] and blocks_ok and len(good_reports) >= 240
                   and max_dim <= 13 and eq <= 1e-12),
    }
