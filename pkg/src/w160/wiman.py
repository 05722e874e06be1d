"""The Wiman curve W^160: special points, odd theta characteristics, symmetries.

The canonical model is cut out by

    Q_A = sum x_j^2,  Q_B = sum zeta^j x_j^2,  Q_C = sum zeta^-j x_j^2

with zeta = exp(2 pi i / 5).  Its 40 special points have exact coordinates
in Q(i, a) and four of them at a time support the 160 odd theta
characteristics listed in ``THETA_TABLE``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cache
from itertools import product
from typing import Sequence

import numpy as np

from .exactfield import ONE, PHI, ZERO, A, I, FieldElem, embed_float

__all__ = [
    "CurvePoint",
    "ThetaChar",
    "GroupElement",
    "DiagQuadric",
    "THETA_TABLE",
    "ZETA",
    "decode_point",
    "all_points",
    "point_matrix",
    "exact_coords",
    "exact_q_rows",
    "scaled_point",
    "theta_point_array",
    "ModelError",
    "NTHETA",
    "NPTS",
    "enumerate_thetas",
    "thetas",
    "group_elements",
    "group_mul",
    "group_index",
    "act_on_vector",
    "act_on_point",
    "act_on_theta",
    "point_permutations",
    "theta_permutations",
    "diag_quadrics",
    "verify_points_on_curve",
    "family_label",
    "FAMILIES",
]

NPTS = 40
NTHETA = 160
ZETA = np.exp(2j * np.pi / 5)
PHI_F = (1 + 5**0.5) / 2

# fmt: off
THETA_TABLE: tuple[tuple[int, int, int, int], ...] = (
    (8, 12, 37, 39), (9, 13, 33, 35), (10, 14, 32, 34), (11, 15, 36, 38),
    (5, 7, 16, 20), (1, 3, 17, 21), (0, 2, 18, 22), (4, 6, 19, 23),
    (13, 15, 24, 28), (9, 11, 25, 29), (8, 10, 26, 30), (12, 14, 27, 31),
    (21, 23, 32, 36), (17, 19, 33, 37), (16, 18, 34, 38), (20, 22, 35, 39),
    (0, 4, 29, 31), (1, 5, 25, 27), (2, 6, 24, 26), (3, 7, 28, 30),
    (8, 12, 36, 38), (9, 13, 32, 34), (10, 14, 33, 35), (11, 15, 37, 39),
    (4, 6, 16, 20), (0, 2, 17, 21), (1, 3, 18, 22), (5, 7, 19, 23),
    (12, 14, 24, 28), (8, 10, 25, 29), (9, 11, 26, 30), (13, 15, 27, 31),
    (20, 22, 32, 36), (16, 18, 33, 37), (17, 19, 34, 38), (21, 23, 35, 39),
    (0, 4, 28, 30), (1, 5, 24, 26), (2, 6, 25, 27), (3, 7, 29, 31),
    (8, 12, 33, 35), (9, 13, 37, 39), (10, 14, 36, 38), (11, 15, 32, 34),
    (1, 3, 16, 20), (5, 7, 17, 21), (4, 6, 18, 22), (0, 2, 19, 23),
    (9, 11, 24, 28), (13, 15, 25, 29), (12, 14, 26, 30), (8, 10, 27, 31),
    (17, 19, 32, 36), (21, 23, 33, 37), (20, 22, 34, 38), (16, 18, 35, 39),
    (0, 4, 25, 27), (1, 5, 29, 31), (2, 6, 28, 30), (3, 7, 24, 26),
    (8, 12, 32, 34), (9, 13, 36, 38), (10, 14, 37, 39), (11, 15, 33, 35),
    (0, 2, 16, 20), (4, 6, 17, 21), (5, 7, 18, 22), (1, 3, 19, 23),
    (8, 10, 24, 28), (12, 14, 25, 29), (13, 15, 26, 30), (9, 11, 27, 31),
    (16, 18, 32, 36), (20, 22, 33, 37), (21, 23, 34, 38), (17, 19, 35, 39),
    (0, 4, 24, 26), (1, 5, 28, 30), (2, 6, 29, 31), (3, 7, 25, 27),
    (24, 25, 34, 37), (28, 29, 32, 39), (30, 31, 33, 38), (26, 27, 35, 36),
    (2, 5, 32, 33), (0, 7, 36, 37), (1, 6, 38, 39), (3, 4, 34, 35),
    (0, 1, 10, 13), (4, 5, 8, 15), (6, 7, 9, 14), (2, 3, 11, 12),
    (8, 9, 18, 21), (12, 13, 16, 23), (14, 15, 17, 22), (10, 11, 19, 20),
    (16, 17, 26, 29), (20, 21, 24, 31), (22, 23, 25, 30), (18, 19, 27, 28),
    (24, 25, 35, 36), (28, 29, 33, 38), (30, 31, 32, 39), (26, 27, 34, 37),
    (3, 4, 32, 33), (1, 6, 36, 37), (0, 7, 38, 39), (2, 5, 34, 35),
    (0, 1, 11, 12), (4, 5, 9, 14), (6, 7, 8, 15), (2, 3, 10, 13),
    (8, 9, 19, 20), (12, 13, 17, 22), (14, 15, 16, 23), (10, 11, 18, 21),
    (16, 17, 27, 28), (20, 21, 25, 30), (22, 23, 24, 31), (18, 19, 26, 29),
    (24, 25, 33, 38), (28, 29, 35, 36), (30, 31, 34, 37), (26, 27, 32, 39),
    (1, 6, 32, 33), (3, 4, 36, 37), (2, 5, 38, 39), (0, 7, 34, 35),
    (0, 1, 9, 14), (4, 5, 11, 12), (6, 7, 10, 13), (2, 3, 8, 15),
    (8, 9, 17, 22), (12, 13, 19, 20), (14, 15, 18, 21), (10, 11, 16, 23),
    (16, 17, 25, 30), (20, 21, 27, 28), (22, 23, 26, 29), (18, 19, 24, 31),
    (24, 25, 32, 39), (28, 29, 34, 37), (30, 31, 35, 36), (26, 27, 33, 38),
    (0, 7, 32, 33), (2, 5, 36, 37), (3, 4, 38, 39), (1, 6, 34, 35),
    (0, 1, 8, 15), (4, 5, 10, 13), (6, 7, 11, 12), (2, 3, 9, 14),
    (8, 9, 16, 23), (12, 13, 18, 21), (14, 15, 19, 20), (10, 11, 17, 22),
    (16, 17, 24, 31), (20, 21, 26, 29), (22, 23, 27, 28), (18, 19, 25, 30),
)
# fmt: on

FAMILIES: tuple[tuple[int, int], ...] = tuple((i, j) for i in range(5) for j in range(i + 1, 5))


class ModelError(RuntimeError):
    """A structural check on the curve model failed."""


# -- points -----------------------------------------------------------------


@dataclass(frozen=True)
class CurvePoint:
    index: int
    coords_exact: tuple[FieldElem, ...]
    coords_float: np.ndarray = field(repr=False, compare=False)
    coord_bounds: np.ndarray = field(repr=False, compare=False)
    zero_coord: int = 0

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coords_float))


def _rotate_right(v: Sequence, q: int) -> list:
    n = len(v)
    return [v[(k - q) % n] for k in range(n)]


def decode_point(J: int) -> CurvePoint:
    """Point ``pt_J``: base vector picked by the bits of ``J % 8``, rotated right by ``J // 8``."""
    if not 0 <= J < NPTS:
        raise ValueError(f"point index {J} outside 0..{NPTS - 1}")
    return _decode_cached(J)


@cache
def exact_coords(J: int) -> tuple[FieldElem, ...]:
    """Exact coordinates of ``pt_J``; touches no floating point."""
    if not 0 <= J < NPTS:
        raise ValueError(f"point index {J} outside 0..{NPTS - 1}")
    q, j = divmod(J, 8)
    j0, j1, j2 = j & 1, (j >> 1) & 1, (j >> 2) & 1
    base = [I * A * (1 - 2 * j0), ONE * (1 - 2 * j1), I * (1 - 2 * j2), A, ZERO]
    return tuple(_rotate_right(base, q))


def exact_q_rows() -> list[list[FieldElem]]:
    """Q_i = x_(i-1)^2 + phi x_i^2 + x_(i+1)^2 (i = 0..4) as exact 15-vectors.

    Lexicographic monomial order; these span I2(W).
    """
    rows = []
    for i in range(5):
        diag = [ZERO] * 5
        diag[(i - 1) % 5], diag[i], diag[(i + 1) % 5] = ONE, PHI, ONE
        rows.append([diag[r] if r == c else ZERO for r in range(5) for c in range(r, 5)])
    return rows


@cache
def _decode_cached(J: int) -> CurvePoint:
    coords = exact_coords(J)
    emb = [embed_float(c) for c in coords]
    zero = [k for k, c in enumerate(coords) if c.is_zero()]
    if len(zero) != 1:
        raise ModelError(f"point {J} must have exactly one zero coordinate")
    return CurvePoint(
        index=J,
        coords_exact=coords,
        coords_float=np.array([z for z, _ in emb], dtype=complex),
        coord_bounds=np.array([b for _, b in emb]),
        zero_coord=zero[0],
    )


def scaled_point(J: int) -> CurvePoint:
    """``pt_J / a``: the representative whose coordinate before the zero is 1.

    Its other coordinates are +-i, +-sqrt(phi) and +-i sqrt(phi).  The
    tangency tests use this scaling; it is the one under which their
    singular values sit in the documented bands.
    """
    if not 0 <= J < NPTS:
        raise ValueError(f"point index {J} outside 0..{NPTS - 1}")
    return _scaled_cached(J)


@cache
def _scaled_cached(J: int) -> CurvePoint:
    p = _decode_cached(J)
    inv_a = A.inverse()
    coords = tuple(c * inv_a for c in p.coords_exact)
    emb = [embed_float(c) for c in coords]
    return CurvePoint(
        index=J,
        coords_exact=coords,
        coords_float=np.array([z for z, _ in emb], dtype=complex),
        coord_bounds=np.array([b for _, b in emb]),
        zero_coord=p.zero_coord,
    )


@cache
def all_points() -> tuple[CurvePoint, ...]:
    return tuple(decode_point(J) for J in range(NPTS))


def point_matrix(scaled: bool = False) -> np.ndarray:
    """40 x 5 complex array of the float coordinates."""
    if scaled:
        return np.array([scaled_point(J).coords_float for J in range(NPTS)])
    return np.array([p.coords_float for p in all_points()])


@cache
def _point_lookup() -> dict[tuple, int]:
    # unit multiples; seeds and group images are always one of these
    table = {}
    for p in all_points():
        for u in (ONE, -ONE, I, -I):
            table[_key(u * c for c in p.coords_exact)] = p.index
    return table


def _key(coords) -> tuple:
    # plain integers hash and compare far faster than Fractions
    return tuple((f.numerator, f.denominator) for c in coords for f in c.coeffs)


def find_point(coords: Sequence[FieldElem]) -> int:
    """Index of the special point projectively equal to ``coords``."""
    coords = tuple(coords)
    hit = _point_lookup().get(_key(coords))
    if hit is not None:
        return hit
    k = next((m for m, c in enumerate(coords) if not c.is_zero()), None)
    if k is None:
        raise ValueError("zero vector is not a projective point")
    for p in all_points():
        if p.coords_exact[k].is_zero():
            continue
        lam = coords[k] / p.coords_exact[k]
        if all(c == lam * e for c, e in zip(coords, p.coords_exact)):
            return p.index
    raise KeyError("not one of the 40 special points")


# -- group G0 ---------------------------------------------------------------


@dataclass(frozen=True, order=True)
class GroupElement:
    """``x -> rot_r(S_s x)``: sign flips from bitmask ``s``, then rotation right by ``r``.

    The sign mask is kept with bit 4 clear since the global flip acts
    trivially on projective points.
    """

    r: int = 0
    s: int = 0

    def __post_init__(self):
        r, s = self.r % 5, self.s & 31
        if s & 16:
            s ^= 31
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "s", s)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return group_mul(self, other)

    def inverse(self) -> "GroupElement":
        # (rot_r S_s)^-1 = S_s rot_-r = rot_-r S_{rot_r s}
        return GroupElement(-self.r, _rot_mask(self.s, self.r))


def _rot_mask(s: int, q: int) -> int:
    bits = [(s >> k) & 1 for k in range(5)]
    rot = _rotate_right(bits, q)
    return sum(b << k for k, b in enumerate(rot))


def group_mul(g: GroupElement, h: GroupElement) -> GroupElement:
    """Element acting as ``g`` after ``h``."""
    return GroupElement(g.r + h.r, _rot_mask(g.s, -h.r) ^ h.s)


@cache
def group_elements() -> tuple[GroupElement, ...]:
    return tuple(GroupElement(r, s) for r in range(5) for s in range(16))


def act_on_vector(g: GroupElement, v: Sequence):
    signed = [-x if (g.s >> k) & 1 else x for k, x in enumerate(v)]
    return _rotate_right(signed, g.r)


def act_on_point(g: GroupElement, J: int) -> int:
    return int(point_permutations()[group_index(g), J])


def group_index(g: GroupElement) -> int:
    return g.r * 16 + g.s


@cache
def point_permutations() -> np.ndarray:
    """80 x 40 array; row ``group_index(g)`` is the action of ``g`` on points."""
    perms = np.empty((80, NPTS), dtype=np.int64)
    for g in group_elements():
        for p in all_points():
            perms[group_index(g), p.index] = find_point(act_on_vector(g, p.coords_exact))
    return perms


# -- theta characteristics --------------------------------------------------


@dataclass(frozen=True)
class ThetaChar:
    index: int
    points: tuple[int, int, int, int]
    family: tuple[int, int]


def family_label(points: Sequence[int]) -> tuple[int, int]:
    zeros = sorted({decode_point(J).zero_coord for J in points})
    if len(zeros) != 2:
        raise ModelError(f"points {points} do not span a two-coordinate family")
    return zeros[0], zeros[1]


def _seed_divisors() -> list[tuple[tuple[FieldElem, ...], ...]]:
    """The 32 displayed divisors of the two seed shapes (before rotation)."""
    out = []
    for e1, e2, e3, e4 in product((1, -1), repeat=4):
        e1, e2, e3, e4 = (ONE * e for e in (e1, e2, e3, e4))
        out.append((
            (I, e1 * A, ZERO, I * A, e2),
            (I, e1 * A, ZERO, -I * A, e2),
            (I, e3, I * A, ZERO, e4 * A),
            (I, e3, -I * A, ZERO, e4 * A),
        ))
        out.append((
            (ZERO, I * A, e1, I, e2 * A),
            (ZERO, I * A, e1, -I, e2 * A),
            (I, e3, I * A, ZERO, e4 * A),
            (-I, e3, I * A, ZERO, e4 * A),
        ))
    return out


def generate_theta_sets() -> set[frozenset[int]]:
    """Seed divisors closed under G0, as sets of point indices."""
    seeds = {frozenset(find_point(v) for v in div) for div in _seed_divisors()}
    perms = point_permutations()
    out = set()
    for s in seeds:
        for row in perms:
            out.add(frozenset(int(row[J]) for J in s))
    return out


@cache
def enumerate_thetas() -> tuple[ThetaChar, ...]:
    """The 160 odd theta characteristics, indexed as in ``THETA_TABLE``.

    The seed construction is regenerated and must reproduce the table
    exactly; any disagreement raises ``ModelError``.
    """
    generated = generate_theta_sets()
    table = {frozenset(t) for t in THETA_TABLE}
    if len(table) != NTHETA or generated != table:
        raise ModelError("generated theta characteristics disagree with the table")
    return tuple(ThetaChar(k, tuple(t), family_label(t)) for k, t in enumerate(THETA_TABLE))


thetas = enumerate_thetas


@cache
def _theta_lookup() -> dict[frozenset[int], int]:
    return {frozenset(t): k for k, t in enumerate(THETA_TABLE)}


def act_on_theta(g: GroupElement, t: ThetaChar | int) -> ThetaChar:
    idx = t.index if isinstance(t, ThetaChar) else int(t)
    return enumerate_thetas()[int(theta_permutations()[group_index(g), idx])]


@cache
def theta_permutations() -> np.ndarray:
    """80 x 160 array; row ``group_index(g)`` permutes theta indices."""
    lookup = _theta_lookup()
    pp = point_permutations()
    out = np.empty((80, NTHETA), dtype=np.int64)
    for gi in range(80):
        for k, t in enumerate(THETA_TABLE):
            img = frozenset(int(pp[gi, J]) for J in t)
            if img not in lookup:
                raise ModelError(f"image of theta {k} is not in the table")
            out[gi, k] = lookup[img]
    return out


def theta_point_array() -> np.ndarray:
    return np.array(THETA_TABLE, dtype=np.int64)


# -- diagonal quadrics ------------------------------------------------------


@dataclass(frozen=True)
class DiagQuadric:
    label: str
    coeffs: tuple  # 5 FieldElems, or complex for Q_B / Q_C

    @property
    def exact(self) -> bool:
        return all(isinstance(c, FieldElem) for c in self.coeffs)

    def float_coeffs(self) -> np.ndarray:
        return _float_coeffs(self.coeffs).copy()

    def eval_exact(self, p: Sequence[FieldElem]) -> FieldElem:
        total = ZERO
        for c, x in zip(self.coeffs, p):
            if not x.is_zero():
                total = total + c * x * x
        return total

    def eval_float(self, p: np.ndarray) -> complex:
        return complex(np.sum(self.float_coeffs() * p * p))


@cache
def _float_coeffs(coeffs: tuple) -> np.ndarray:
    if all(isinstance(c, FieldElem) for c in coeffs):
        return np.array([embed_float(c)[0] for c in coeffs])
    return np.array(coeffs, dtype=complex)


@cache
def diag_quadrics() -> dict[str, DiagQuadric]:
    out = {
        "A": DiagQuadric("A", (ONE,) * 5),
        "B": DiagQuadric("B", tuple(complex(ZETA**j) for j in range(5))),
        "C": DiagQuadric("C", tuple(complex(ZETA ** (-j)) for j in range(5))),
    }
    for i in range(5):
        c = [ZERO] * 5
        c[(i - 1) % 5], c[i], c[(i + 1) % 5] = ONE, PHI, ONE
        out[f"Q{i}"] = DiagQuadric(f"Q{i}", tuple(c))
        c = [ZERO] * 5
        c[i], c[(i + 2) % 5], c[(i + 3) % 5] = -ONE, PHI, PHI
        out[f"Q{i}'"] = DiagQuadric(f"Q{i}'", tuple(c))
    return out


def _cyclotomic_zero(weights: Sequence[int], p: Sequence[FieldElem]) -> bool:
    """Exact test of ``sum zeta^(w_j) p_j^2 == 0`` in Q(zeta).

    Each ``p_j^2`` lies in Q(sqrt 5) = Q(a^2) and a^2 = zeta + zeta^4, so the
    sum is computed over the power basis 1, zeta, zeta^2, zeta^3.
    """
    acc = [Fraction(0)] * 5
    for w, x in zip(weights, p):
        y = (x * x).coeffs
        if any(y[k] for k in (1, 3, 4, 5, 6, 7)):
            raise ModelError("squared coordinate outside Q(sqrt 5)")
        # y0 + y2 (zeta + zeta^4), times zeta^w
        acc[w % 5] += y[0]
        acc[(w + 1) % 5] += y[2]
        acc[(w + 4) % 5] += y[2]
    # zeta^4 = -(1 + zeta + zeta^2 + zeta^3)
    return all(acc[k] - acc[4] == 0 for k in range(4))


@dataclass
class CurveReport:
    exact_ok: bool
    float_ok: bool
    max_float_residual: float
    failures: list[str]


def verify_points_on_curve(tol: float = 1e-14) -> CurveReport:
    """Exact Q_A = Q_B = Q_C = 0 on every point, plus float residuals of all diagonal quadrics."""
    quads = diag_quadrics()
    failures = []
    worst = 0.0
    for p in all_points():
        if not quads["A"].eval_exact(p.coords_exact).is_zero():
            failures.append(f"Q_A exact at {p.index}")
        if not _cyclotomic_zero(range(5), p.coords_exact):
            failures.append(f"Q_B exact at {p.index}")
        if not _cyclotomic_zero([-j for j in range(5)], p.coords_exact):
            failures.append(f"Q_C exact at {p.index}")
        for lbl, q in quads.items():
            if q.exact and not q.eval_exact(p.coords_exact).is_zero():
                failures.append(f"{lbl} exact at {p.index}")
            r = abs(q.eval_float(p.coords_float))
            worst = max(worst, r)
            if r > tol:
                failures.append(f"{lbl} float residual {r:.3g} at {p.index}")
    exact_ok = not any("exact" in f for f in failures)
    float_ok = not any("float" in f for f in failures)
    return CurveReport(exact_ok, float_ok, worst, failures)
