"""Certified dense complex linear algebra on quadrics in five variables.

Quadrics are 15-vectors over the lexicographic monomial basis
``x0^2, x0x1, ..., x0x4, x1^2, ..., x4^2``.  ``IRREP_BASIS`` is a unitary
15x15 matrix whose columns split the space into the five blocks

* R1: x_j x_{j+1}                      (5)
* R2: x_j x_{j+2}                      (5)
* R3: sum x_j^2                        (1)
* R4: sum zeta^(+-j) x_j^2             (2)
* R5: sum zeta^(+-2j) x_j^2            (2)

and R3 + R4 is the space of quadrics containing the curve.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cache

import numpy as np

__all__ = [
    "MONOMIALS",
    "BLOCKS",
    "KEEP",
    "DROP",
    "IRREP_BASIS",
    "CertifiedSVD",
    "CertificationError",
    "GapViolation",
    "GapClassification",
    "svd_verified",
    "svd_verified_batch",
    "classify_gap",
    "classify_values",
    "monomial_vector",
    "monomial_matrix",
    "to_irrep",
    "from_irrep",
    "project_out_i2",
    "symmetric_matrix",
    "quadric_from_symmetric",
    "quadric_action",
]

UNIT_ROUNDOFF = 2.0**-53
UNITARY_TOL = 1e-14
RECON_TOL = 3e-14

MONOMIALS: tuple[tuple[int, int], ...] = tuple((i, k) for i in range(5) for k in range(i, 5))
_MONO_INDEX = {m: n for n, m in enumerate(MONOMIALS)}
_MI = np.array([m[0] for m in MONOMIALS])
_MK = np.array([m[1] for m in MONOMIALS])

BLOCKS: dict[str, slice] = {
    "R1": slice(0, 5),
    "R2": slice(5, 10),
    "R3": slice(10, 11),
    "R4": slice(11, 13),
    "R5": slice(13, 15),
}
KEEP = np.r_[0:10, 13:15]
DROP = np.r_[10:13]


class CertificationError(RuntimeError):
    """A verified quantity failed its threshold; results must not be used."""


class GapViolation(CertificationError):
    """A value fell between the bands, or the bands overlap after inflation."""


def _mono(i: int, k: int) -> int:
    return _MONO_INDEX[(min(i, k), max(i, k))]


def _build_irrep_basis() -> np.ndarray:
    B = np.zeros((15, 15), dtype=complex)
    for j in range(5):
        B[_mono(j, (j + 1) % 5), j] = 1.0
        B[_mono(j, (j + 2) % 5), 5 + j] = 1.0
    zeta = np.exp(2j * np.pi / 5)
    for col, k in zip(range(10, 15), (0, 1, 4, 2, 3)):
        for j in range(5):
            B[_mono(j, j), col] = zeta ** (k * j) / np.sqrt(5)
    return B


IRREP_BASIS: np.ndarray = _build_irrep_basis()
IRREP_BASIS.setflags(write=False)


# -- SVD ----------------------------------------------------------------------


@dataclass(frozen=True)
class CertifiedSVD:
    U: np.ndarray
    D: np.ndarray
    V: np.ndarray
    shape: tuple[int, int]
    residual_recon: float
    residual_unitary: float
    spectral_perturbation: float

    def kernel_basis(self, k: int) -> np.ndarray:
        """Right singular vectors of the ``k`` smallest singular directions (columns)."""
        n = self.shape[1]
        return self.V[:, n - k :] if k else self.V[:, :0]


def _residuals(A: np.ndarray, U: np.ndarray, s: np.ndarray, Vh: np.ndarray):
    """Entrywise residuals, batched over leading axes."""
    m, n = A.shape[-2:]
    r = min(m, n)
    recon = (U[..., :, :r] * s[..., None, :]) @ Vh[..., :r, :]
    res_recon = np.abs(recon - A).max(axis=(-2, -1)) if A.size else np.zeros(A.shape[:-2])
    eye_m, eye_n = np.eye(m), np.eye(n)
    ru = np.abs(U @ np.conj(np.swapaxes(U, -1, -2)) - eye_m).max(axis=(-2, -1))
    rv = np.abs(np.conj(np.swapaxes(Vh, -1, -2)) @ Vh - eye_n).max(axis=(-2, -1))
    return res_recon, np.maximum(ru, rv)


def _perturbation(m: int, n: int, smax, res_recon, res_unit):
    # sigma(A) vs D: Frobenius bound for A - U D V^H, rounding of the check
    # product itself, and the non-unitarity of U and V (relative to sigma_max)
    rounding = (max(m, n) + 2) * UNIT_ROUNDOFF * smax
    eta = max(m, n) * res_unit
    return np.sqrt(m * n) * (res_recon + rounding) + smax * (2 * eta + eta * eta)


def svd_verified(A: np.ndarray, *, check: bool = True) -> CertifiedSVD:
    """SVD with residuals recomputed by explicit multiplication.

    Raises ``CertificationError`` when the unitarity residual exceeds 1e-14
    or the reconstruction residual exceeds 3e-14 (entrywise maxima), after
    one retry through the conjugate transpose.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2:
        raise ValueError("expected a matrix")
    m, n = A.shape
    if m == 0 or n == 0:
        return CertifiedSVD(np.eye(m, dtype=complex), np.zeros(0), np.eye(n, dtype=complex), (m, n), 0.0, 0.0, 0.0)
    U, s, Vh = np.linalg.svd(A, full_matrices=True)
    res_recon, res_unit = (float(r) for r in _residuals(A, U, s, Vh))
    if res_unit > UNITARY_TOL or res_recon > RECON_TOL:
        # second attempt through the conjugate transpose; LAPACK takes a
        # different path and the residuals are recomputed against A itself
        W, s2, Zh = np.linalg.svd(np.conj(A.T), full_matrices=True)
        U2, Vh2 = np.conj(Zh.T), np.conj(W.T)
        r2 = tuple(float(r) for r in _residuals(A, U2, s2, Vh2))
        if max(r2[0] / RECON_TOL, r2[1] / UNITARY_TOL) < max(res_recon / RECON_TOL, res_unit / UNITARY_TOL):
            U, s, Vh = U2, s2, Vh2
            res_recon, res_unit = r2
    if check and (res_unit > UNITARY_TOL or res_recon > RECON_TOL):
        raise CertificationError(
            f"SVD residuals too large: unitary {res_unit:.3g}, reconstruction {res_recon:.3g}"
        )
    pert = float(_perturbation(m, n, s[0] if s.size else 0.0, res_recon, res_unit))
    return CertifiedSVD(U, s, np.conj(Vh.T), (m, n), res_recon, res_unit, pert)


@dataclass
class BatchSVD:
    s: np.ndarray  # (N, min(m, n))
    V: np.ndarray  # (N, n, n) right singular vectors as columns
    residual_recon: np.ndarray
    residual_unitary: np.ndarray
    spectral_perturbation: np.ndarray
    ok: np.ndarray  # residual thresholds met


def svd_verified_batch(A: np.ndarray) -> BatchSVD:
    """``svd_verified`` over a stack of equally shaped matrices.

    Failing members are flagged in ``ok`` rather than raising, so a sweep
    can route them to the conservative branch.
    """
    A = np.asarray(A, dtype=complex)
    m, n = A.shape[-2:]
    U, s, Vh = np.linalg.svd(A, full_matrices=True)
    res_recon, res_unit = _residuals(A, U, s, Vh)
    pert = _perturbation(m, n, s[..., 0], res_recon, res_unit)
    ok = (res_unit <= UNITARY_TOL) & (res_recon <= RECON_TOL)
    return BatchSVD(s, np.conj(np.swapaxes(Vh, -1, -2)), res_recon, res_unit, pert, ok)


# -- gap classification -----------------------------------------------------


@dataclass(frozen=True)
class GapClassification:
    k_low: int
    k_high: int
    max_low: float
    min_high: float
    low_top: float
    high_bottom: float


def classify_values(values, low_max: float, high_min: float, high_max: float,
                    perturbation: float = 0.0, low_budget: float = 0.0) -> GapClassification:
    """Split values into a low band and a high band, both inflated by ``perturbation``.

    ``low_budget`` widens the low band further (the worst value a genuine
    zero could produce).  Raises ``GapViolation`` when the inflated bands
    touch or a value lands outside both.
    """
    values = np.abs(np.asarray(values, dtype=float).ravel())
    low_top = low_max + low_budget + perturbation
    high_bottom = high_min - perturbation
    if not low_top < high_bottom:
        raise GapViolation(f"bands overlap: low band reaches {low_top:.3g}, high band starts {high_bottom:.3g}")
    low = values <= low_top
    high = (values >= high_bottom) & (values <= high_max + perturbation)
    bad = ~(low | high)
    if bad.any():
        raise GapViolation(f"value {values[bad][0]:.3g} outside [0, {low_top:.3g}] and "
                           f"[{high_bottom:.3g}, {high_max + perturbation:.3g}]")
    return GapClassification(
        k_low=int(low.sum()),
        k_high=int(high.sum()),
        max_low=float(values[low].max()) if low.any() else 0.0,
        min_high=float(values[high].min()) if high.any() else float("inf"),
        low_top=low_top,
        high_bottom=high_bottom,
    )


def classify_gap(svd: CertifiedSVD, low_max: float, high_min: float, high_max: float,
                 low_budget: float = 0.0) -> GapClassification:
    return classify_values(svd.D, low_max, high_min, high_max, svd.spectral_perturbation, low_budget)


# -- quadrics ---------------------------------------------------------------


def monomial_vector(p) -> np.ndarray:
    """The 15 products ``p_i p_k`` (i <= k) in lexicographic order."""
    p = np.asarray(p)
    return p[..., _MI] * p[..., _MK]


def monomial_matrix(points) -> np.ndarray:
    return monomial_vector(np.asarray(points, dtype=complex))


def to_irrep(v: np.ndarray) -> np.ndarray:
    """Coordinates of quadric(s) ``v`` in the irrep basis (last axis)."""
    return np.asarray(v) @ np.conj(IRREP_BASIS)


def from_irrep(y: np.ndarray) -> np.ndarray:
    return np.asarray(y) @ IRREP_BASIS.T


def project_out_i2(M15: np.ndarray) -> np.ndarray:
    """``M15 @ B`` restricted to the R1, R2, R5 columns.

    A vector ``y`` is in the kernel of the result exactly when the quadric
    ``from_irrep`` of ``y`` (zero on R3, R4) vanishes on every row's point.
    """
    return np.asarray(M15) @ IRREP_BASIS[:, KEEP]


def symmetric_matrix(q: np.ndarray) -> np.ndarray:
    """5x5 symmetric S with ``q(x) = x^T S x``."""
    S = np.zeros(q.shape[:-1] + (5, 5), dtype=complex)
    for n, (i, k) in enumerate(MONOMIALS):
        if i == k:
            S[..., i, i] = q[..., n]
        else:
            S[..., i, k] = S[..., k, i] = q[..., n] / 2
    return S


def quadric_from_symmetric(S: np.ndarray) -> np.ndarray:
    return np.stack([S[..., i, k] if i == k else 2 * S[..., i, k] for i, k in MONOMIALS], axis=-1)


def quadric_action(r: int, signs: int) -> np.ndarray:
    """15x15 matrix of ``q -> q o g^-1`` for ``g = rot_r S_signs`` on coefficient vectors."""
    T = np.zeros((15, 15))
    for n, (i, k) in enumerate(MONOMIALS):
        sgn = (-1) ** (((signs >> i) & 1) + ((signs >> k) & 1))
        T[_mono((i + r) % 5, (k + r) % 5), n] = sgn
    return T


@cache
def block_of(col: int) -> str:
    for name, sl in BLOCKS.items():
        if sl.start <= col < sl.stop:
            return name
    raise IndexError(col)
