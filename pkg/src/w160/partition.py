"""Steiner-class partition of the 160 distinguished odd thetas.

The sweep visits one representative of every G0-orbit of 4-subsets, runs
the three-stage test and collects the set ``A`` of quadruples that could
not be certified as non-2K.  Pairs of thetas are then joined whenever
their union lies in ``A``; the result is accepted only if this relation
is an equivalence with exactly the expected census.
"""

from __future__ import annotations

import logging
import math
import time
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations

import numba
import numpy as np

from . import symplectic
from .certlinalg import IRREP_BASIS, KEEP, monomial_matrix, svd_verified_batch
from .tangency import (
    DEFAULT_BANDS,
    Bands,
    StageRecord,
    Verdict,
    certify_profile,
    multiplicity_profile,
    perturbation_budget,
    point_epsilon,
    _rounding,
)
from .wiman import NPTS, NTHETA, point_matrix, scaled_point, theta_permutations, theta_point_array, thetas

__all__ = [
    "PartitionError",
    "PartitionResult",
    "SweepResult",
    "orbit_representatives",
    "certify_quadruple",
    "sweep",
    "build_partition",
    "crosscheck_f2",
    "run_partition",
    "canonical_quad",
    "EXPECTED_TABLE",
    "expand_orbits",
    "census",
    "check_table",
]

log = logging.getLogger(__name__)

GROUP_ORDER = 80
EXPECTED_CLASSES = 510
# (pairs per class, number of classes, orbit size, number of orbits)
EXPECTED_TABLE = ((48, 15, 5, 3), (32, 15, 5, 3), (24, 480, 40, 12))


class PartitionError(RuntimeError):
    """The relation from the sweep is not the expected equivalence."""


# -- orbit representatives --------------------------------------------------


@numba.njit(cache=True, inline="always")
def _sort4(a, b, c, d):
    if a > b:
        a, b = b, a
    if c > d:
        c, d = d, c
    if a > c:
        a, c = c, a
    if b > d:
        b, d = d, b
    if b > c:
        b, c = c, b
    return a, b, c, d


@numba.njit(cache=True)
def _orbit_size(perms, a, b, c, d):
    """0 if (a,b,c,d) is not minimal in its orbit, else the orbit size."""
    stab = 1
    for g in range(1, perms.shape[0]):
        w, x, y, z = _sort4(perms[g, a], perms[g, b], perms[g, c], perms[g, d])
        if w < a or (w == a and (x < b or (x == b and (y < c or (y == c and z < d))))):
            return 0
        if w == a and x == b and y == c and z == d:
            stab += 1
    return perms.shape[0] // stab


@numba.njit(cache=True, parallel=True)
def _count_reps(perms, pa, pb):
    n = perms.shape[1]
    out = np.zeros(pa.shape[0], dtype=np.int64)
    for k in numba.prange(pa.shape[0]):
        a, b = pa[k], pb[k]
        cnt = 0
        for c in range(b + 1, n):
            for d in range(c + 1, n):
                if _orbit_size(perms, a, b, c, d):
                    cnt += 1
        out[k] = cnt
    return out


@numba.njit(cache=True, parallel=True)
def _fill_reps(perms, pa, pb, offsets, reps, sizes):
    n = perms.shape[1]
    for k in numba.prange(pa.shape[0]):
        a, b = pa[k], pb[k]
        pos = offsets[k]
        for c in range(b + 1, n):
            for d in range(c + 1, n):
                s = _orbit_size(perms, a, b, c, d)
                if s:
                    reps[pos, 0] = a
                    reps[pos, 1] = b
                    reps[pos, 2] = c
                    reps[pos, 3] = d
                    sizes[pos] = s
                    pos += 1


def orbit_representatives(perms: np.ndarray | None = None, threads: int | None = None):
    """Lexicographically minimal member of every G0-orbit of 4-subsets.

    Returns ``(reps, sizes)``: an ``(N, 4)`` array of sorted quadruples in
    lexicographic order and the matching orbit sizes.  Output does not
    depend on the thread count.
    """
    if perms is None:
        perms = theta_permutations()
    perms = np.ascontiguousarray(perms, dtype=np.int64)
    if threads:
        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
    n = perms.shape[1]
    pa, pb = np.array(list(combinations(range(n), 2)), dtype=np.int64).T.copy()
    counts = _count_reps(perms, pa, pb)
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
    total = int(counts.sum())
    reps = np.empty((total, 4), dtype=np.int64)
    sizes = np.empty(total, dtype=np.int64)
    _fill_reps(perms, pa, pb, offsets, reps, sizes)
    return reps, sizes


def canonical_quad(quad) -> tuple[int, ...]:
    """Orbit representative of ``quad`` under G0."""
    perms = theta_permutations()
    q = np.asarray(quad)
    return min(tuple(sorted(row)) for row in perms[:, q])


# -- sweep ------------------------------------------------------------------


def certify_quadruple(quad, bands: Bands = DEFAULT_BANDS, trace: list | None = None) -> Verdict:
    """Three-stage test on four theta indices."""
    return certify_profile(multiplicity_profile(tuple(int(t) for t in quad)), bands, trace)


@dataclass
class SweepResult:
    reps: np.ndarray
    sizes: np.ndarray
    certified: np.ndarray  # bool per representative
    stage: np.ndarray  # 1, 2, 3 for certified, 0 otherwise
    reasons: dict[int, str]  # representative row -> candidate reason
    stage_extremes: dict[int, dict[str, float]]
    bands: Bands
    elapsed: float

    @property
    def a_reps(self) -> np.ndarray:
        return self.reps[~self.certified]

    def verdict_stats(self) -> dict:
        c = Counter(int(s) for s in self.stage)
        return {
            "representatives": int(len(self.reps)),
            "certified_stage1": c.get(1, 0),
            "certified_stage2": c.get(2, 0),
            "certified_stage3": c.get(3, 0),
            "candidates": c.get(0, 0),
            "candidate_reasons": dict(Counter(self.reasons.values())),
        }


def _point_tables():
    pts = [scaled_point(J) for J in range(NPTS)]
    P12 = monomial_matrix(point_matrix(scaled=True)) @ IRREP_BASIS[:, KEEP]
    norms = np.array([p.norm for p in pts])
    eps = np.array([point_epsilon(p) for p in pts])
    return P12, norms, eps


class _Extremes:
    def __init__(self):
        self.d: dict[int, dict[str, float]] = {}

    def add(self, stage, max_low, min_high, low_top, high_bottom):
        e = self.d.setdefault(stage, {"max_low": 0.0, "min_high": math.inf,
                                      "low_top_min": math.inf, "high_bottom_max": -math.inf})
        e["max_low"] = max(e["max_low"], float(max_low))
        e["min_high"] = min(e["min_high"], float(min_high))
        e["low_top_min"] = min(e["low_top_min"], float(low_top))
        e["high_bottom_max"] = max(e["high_bottom_max"], float(high_bottom))

    def add_record(self, r: StageRecord):
        self.add(r.stage, r.max_low, r.min_high, r.low_top, r.high_bottom)


def sweep(reps: np.ndarray, sizes: np.ndarray, bands: Bands = DEFAULT_BANDS,
          chunk: int = 20000, progress=None) -> SweepResult:
    """Certify every representative.

    Stage 1 runs batched; the budget and band logic are the same as
    ``stage1_vanishing``.  Anything not certified there (including SVDs
    that miss the residual thresholds) goes through the scalar pipeline.
    """
    t0 = time.perf_counter()
    P12, norms, eps_pt = _point_tables()
    tp = theta_point_array()
    allpts = np.sort(tp[reps].reshape(len(reps), 16), axis=1)
    fresh = np.ones_like(allpts, dtype=bool)
    fresh[:, 1:] = allpts[:, 1:] != allpts[:, :-1]
    ndist = fresh.sum(axis=1)
    certified = np.zeros(len(reps), dtype=bool)
    stage = np.zeros(len(reps), dtype=np.int8)
    ext = _Extremes()
    b1 = bands.stage1
    for n in np.unique(ndist):
        rows = np.nonzero(ndist == n)[0]
        if n < 12:
            continue  # a kernel is guaranteed; scalar path
        for start in range(0, len(rows), chunk):
            idx = rows[start:start + chunk]
            dist = allpts[idx][fresh[idx]].reshape(len(idx), n)
            svd = svd_verified_batch(P12[dist])
            p_norm = norms[dist].max(axis=1)
            eps = eps_pt[dist].max(axis=1)
            row_err = perturbation_budget(eps, 0.0, 0.0, p_norm, 1.0)[0] + _rounding(p_norm)
            low_top = b1.low_max + np.sqrt(n) * row_err + svd.spectral_perturbation
            high_bottom = b1.high_min - svd.spectral_perturbation
            high_top = b1.high_max + svd.spectral_perturbation
            s = svd.s
            low = s <= low_top[:, None]
            high = (s >= high_bottom[:, None]) & (s <= high_top[:, None])
            clean = svd.ok & (low_top < high_bottom) & (low | high).all(axis=1)
            done = clean & high.all(axis=1)
            certified[idx[done]] = True
            stage[idx[done]] = 1
            if done.any():
                ext.add(1, np.where(low[done], s[done], 0).max(), s[done].min(),
                        low_top[done].min(), high_bottom[done].max())
            if progress:
                progress(int(start + len(idx)), int(len(rows)), int(n))
    reasons: dict[int, str] = {}
    for r in np.nonzero(~certified)[0]:
        trace: list[StageRecord] = []
        v = certify_quadruple(reps[r], bands, trace)
        for rec in trace:
            ext.add_record(rec)
        if v.certified:
            certified[r] = True
            stage[r] = v.stage
        else:
            reasons[int(r)] = v.reason
    return SweepResult(reps, sizes, certified, stage, reasons, ext.d, bands, time.perf_counter() - t0)


# -- partition ----------------------------------------------------------------


def _pair_index():
    pairs = list(combinations(range(NTHETA), 2))
    return pairs, {p: k for k, p in enumerate(pairs)}


def expand_orbits(reps: np.ndarray) -> set[tuple[int, int, int, int]]:
    perms = theta_permutations()
    out = set()
    for q in reps:
        imgs = np.sort(perms[:, q], axis=1)
        out.update(map(tuple, imgs.tolist()))
    return out


@dataclass
class PartitionResult:
    classes: list[list[tuple[int, int]]]  # each sorted, classes sorted by first pair
    class_orbit: list[int]  # orbit id per class
    orbit_sizes: list[int]
    a_quads: int
    table: list[dict]
    sweep_stats: dict = field(default_factory=dict)
    stage_extremes: dict = field(default_factory=dict)
    bands: dict = field(default_factory=dict)
    sweep: SweepResult | None = field(default=None, repr=False, compare=False)

    def class_of_pair(self) -> dict[tuple[int, int], int]:
        return {p: c for c, cl in enumerate(self.classes) for p in cl}

    def to_json(self) -> dict:
        return {
            "classes": [[list(p) for p in cl] for cl in self.classes],
            "class_orbit": self.class_orbit,
            "orbit_sizes": self.orbit_sizes,
            "a_quadruples": self.a_quads,
            "table": self.table,
            "verdict_stats": self.sweep_stats,
            "stage_extremes": {str(k): v for k, v in self.stage_extremes.items()},
            "bands": self.bands,
        }

    @classmethod
    def from_json(cls, d: dict) -> "PartitionResult":
        return cls(
            classes=[[tuple(p) for p in cl] for cl in d["classes"]],
            class_orbit=list(d["class_orbit"]),
            orbit_sizes=list(d["orbit_sizes"]),
            a_quads=d["a_quadruples"],
            table=d["table"],
            sweep_stats=d.get("verdict_stats", {}),
            stage_extremes={int(k): v for k, v in d.get("stage_extremes", {}).items()},
            bands=d.get("bands", {}),
        )


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def build_partition(a_quads: set[tuple[int, int, int, int]]) -> tuple[list, list, list]:
    """Classes of the relation "P1 and P2 disjoint with P1 + P2 in A".

    Raises ``PartitionError`` unless the relation is complete inside each
    connected class, the classes consist of disjoint pairs, every pair of
    thetas is covered and the class count and census are as expected.
    """
    pairs, index = _pair_index()
    parent = list(range(len(pairs)))
    for a, b, c, d in a_quads:
        for p1, p2 in (((a, b), (c, d)), ((a, c), (b, d)), ((a, d), (b, c))):
            r1, r2 = _find(parent, index[p1]), _find(parent, index[p2])
            if r1 != r2:
                parent[max(r1, r2)] = min(r1, r2)
    groups: dict[int, list] = defaultdict(list)
    for k, p in enumerate(pairs):
        groups[_find(parent, k)].append(p)
    classes = sorted(sorted(g) for g in groups.values())
    # every class must be a set of disjoint pairs, related all-to-all
    expected_edges = 0
    for cl in classes:
        if len(cl) < 2:
            raise PartitionError(f"pair {cl[0]} is in no relation")
        flat = [t for p in cl for t in p]
        if len(set(flat)) != len(flat):
            raise PartitionError(f"class starting {cl[0]} has overlapping pairs")
        for p1, p2 in combinations(cl, 2):
            if tuple(sorted(p1 + p2)) not in a_quads:
                raise PartitionError(f"relation not transitive: {p1} ~ {p2} missing")
        expected_edges += len(cl) * (len(cl) - 1) // 2
    if 3 * len(a_quads) != expected_edges:
        raise PartitionError(f"{len(a_quads)} quadruples in A but classes need {expected_edges // 3}")
    if len(classes) != EXPECTED_CLASSES:
        raise PartitionError(f"{len(classes)} classes, expected {EXPECTED_CLASSES}")
    orbit_of, orbit_sizes = _class_orbits(classes)
    return classes, orbit_of, orbit_sizes


def _class_orbits(classes):
    perms = theta_permutations()
    key = {cl[0]: c for c, cl in enumerate(classes)}
    orbit_of = [-1] * len(classes)
    orbit_sizes = []
    for c, cl in enumerate(classes):
        if orbit_of[c] >= 0:
            continue
        oid = len(orbit_sizes)
        members = set()
        for g in perms:
            img = sorted(tuple(sorted((int(g[x]), int(g[y])))) for x, y in cl)
            members.add(key[img[0]])
        for m in members:
            orbit_of[m] = oid
        orbit_sizes.append(len(members))
    return orbit_of, orbit_sizes


def _family_of() -> list[tuple[int, int]]:
    return [t.family for t in thetas()]


def census(classes, orbit_of, orbit_sizes) -> list[dict]:
    fam = _family_of()
    rows: dict[tuple, dict] = {}
    seen_orbits: dict[tuple, set] = defaultdict(set)
    for c, cl in enumerate(classes):
        kinds = {fam[x] == fam[y] for x, y in cl}
        if len(kinds) != 1:
            raise PartitionError(f"class {c} mixes within- and cross-family pairs")
        kind = "within" if kinds.pop() else "cross"
        k = (kind, len(cl), orbit_sizes[orbit_of[c]])
        rows.setdefault(k, {"shape": kind, "pairs_per_class": len(cl), "classes": 0,
                            "orbit_size": k[2], "orbits": 0})
        rows[k]["classes"] += 1
        seen_orbits[k].add(orbit_of[c])
    for k, r in rows.items():
        r["orbits"] = len(seen_orbits[k])
    return sorted(rows.values(), key=lambda r: (-r["pairs_per_class"], r["shape"]))


def check_table(table: list[dict]):
    got = sorted((r["pairs_per_class"], r["classes"], r["orbit_size"], r["orbits"]) for r in table)
    if got != sorted(EXPECTED_TABLE):
        raise PartitionError(f"census {got} differs from expected {sorted(EXPECTED_TABLE)}")


def crosscheck_f2(result: PartitionResult) -> dict:
    """Compare the numerical partition with the F2-symplectic predictions.

    Families are matched to the F2 labels through the zero-coordinate pair
    ``(i, j)``; the comparison is also made up to relabeling so a labeling
    mismatch is reported separately from a structural one.
    """
    fam = _family_of()
    predicted = symplectic.predict_partition_table()
    pred_rows = sorted((r.shape, r.pairs_per_system, r.systems, r.orbit_size, r.orbits) for r in predicted)
    got_rows = sorted((r["shape"], r["pairs_per_class"], r["classes"], r["orbit_size"], r["orbits"])
                      for r in result.table)
    within = sum(len(cl) for cl in result.classes if fam[cl[0][0]] == fam[cl[0][1]])
    cross = sum(len(cl) for cl in result.classes) - within

    # per class: how many pairs each (unordered) family pair contributes
    num_patterns = Counter()
    num_triples = set()
    for cl in result.classes:
        inc = Counter(frozenset((fam[x], fam[y])) for x, y in cl)
        num_patterns[(len(cl), tuple(sorted(inc.values())))] += 1
        if fam[cl[0][0]] != fam[cl[0][1]]:
            num_triples.add(frozenset(inc))
    pred_patterns = Counter()
    counts = symplectic.predicted_counts()
    for mu, fams in symplectic.family_incidence().items():
        per = [8] * len(fams)
        pred_patterns[(counts[mu], tuple(per))] += 1
    pred_triples = set(symplectic.cross_mu_triples())
    report = {
        "table_match": pred_rows == got_rows,
        "predicted_table": [list(r) for r in pred_rows],
        "numerical_table": [list(r) for r in got_rows],
        "within_pairs": within,
        "cross_pairs": cross,
        "within_pairs_expected": 10 * math.comb(16, 2),
        "cross_pairs_expected": 480 * 24,
        "incidence_match": num_patterns == pred_patterns,
        "cross_family_triples_match": num_triples == pred_triples,
        "cross_family_triple_count": len(num_triples),
        "cross_family_triple_sizes": sorted(Counter(len(t) for t in num_triples).items()),
    }
    report["ok"] = bool(report["table_match"] and report["incidence_match"] and within == 1200
                        and cross == 11520 and len(num_triples) == 15
                        and all(len(t) == 3 for t in num_triples))
    return report


def run_partition(threads: int | None = None, bands: Bands = DEFAULT_BANDS, progress=None) -> PartitionResult:
    """Full pipeline: representatives, sweep, partition, census check."""
    t0 = time.perf_counter()
    reps, sizes = orbit_representatives(threads=threads)
    if int(sizes.sum()) != math.comb(NTHETA, 4):
        raise PartitionError("orbit sizes do not add up to C(160, 4)")
    log.info("%d orbit representatives in %.1fs", len(reps), time.perf_counter() - t0)
    sw = sweep(reps, sizes, bands, progress=progress)
    log.info("sweep: %s in %.1fs", sw.verdict_stats(), sw.elapsed)
    a_quads = expand_orbits(sw.a_reps)
    classes, orbit_of, orbit_sizes = build_partition(a_quads)
    table = census(classes, orbit_of, orbit_sizes)
    check_table(table)
    stats = sw.verdict_stats()
    stats["elapsed_seconds"] = round(time.perf_counter() - t0, 1)
    return PartitionResult(classes, orbit_of, orbit_sizes, len(a_quads), table, stats,
                           sw.stage_extremes, bands.to_json(), sw)
