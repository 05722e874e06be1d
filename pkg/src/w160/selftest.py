"""Consolidated cross-checks behind ``w160 selftest``."""

from __future__ import annotations

import json
from typing import Callable

import numpy as np

from .tangency import DEFAULT_BANDS, Bands

Check = tuple[str, bool, str]


def _run(name: str, fn: Callable[[], tuple[bool, str]]) -> Check:
    try:
        ok, info = fn()
    except Exception as e:  # a crashing check is a failing check
        return name, False, f"{type(e).__name__}: {e}"
    return name, bool(ok), info


def _model():
    from .wiman import THETA_TABLE, generate_theta_sets, verify_points_on_curve

    rep = verify_points_on_curve()
    same = generate_theta_sets() == {frozenset(t) for t in THETA_TABLE}
    return rep.exact_ok and rep.float_ok and same, f"table regenerated={same}, float residual {rep.max_float_residual:.2g}"


def _irrep():
    from .certlinalg import IRREP_BASIS, from_irrep, to_irrep

    rng = np.random.default_rng(1)
    v = rng.standard_normal((50, 15)) + 1j * rng.standard_normal((50, 15))
    rt = float(np.abs(from_irrep(to_irrep(v)) - v).max())
    un = float(np.abs(IRREP_BASIS @ np.conj(IRREP_BASIS.T) - np.eye(15)).max())
    return rt <= 1e-14 and un <= 1e-14, f"round trip {rt:.2g}, unitarity {un:.2g}"


def _hyperplanes():
    from .ic2 import theta_hyperplane

    worst = max(max(h.point_residual, h.tangent_residual) for h in map(theta_hyperplane, range(160)))
    return worst <= 1e-13, f"160 hyperplanes, worst residual {worst:.2g}"


def _f2():
    from .symplectic import brute_partition_table, predict_partition_table

    p, b = predict_partition_table(), brute_partition_table()
    return p == b, "; ".join(f"{r.systems}x{r.pairs_per_system} ({r.shape})" for r in p)


def _svd():
    from .certlinalg import svd_verified

    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        m, n = rng.integers(1, 17), rng.integers(1, 16)
        A = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        worst = max(worst, svd_verified(A).residual_recon)
    return True, f"100 random matrices, worst reconstruction {worst:.2g}"


def _witness_entry():
    from .witness import check_quadruple_exact

    c = check_quadruple_exact((0, 9, 22, 70))
    return c.ok, f"[0,9,22,70] exact rank {c.rank}, kernel outside I2={c.outside_i2}"


def run_selftest(partition_path: str | None = None, quick: bool = False,
                 bands: Bands = DEFAULT_BANDS, threads: int | None = None) -> list[Check]:
    results = [
        _run("model", _model),
        _run("irrep round trip", _irrep),
        _run("theta hyperplanes", _hyperplanes),
        _run("F2 census", _f2),
        _run("certified SVD", _svd),
        _run("exact witness entry", _witness_entry),
    ]
    if quick:
        return results
    from .partition import PartitionResult, check_table, crosscheck_f2, run_partition

    state = {}

    def partition():
        if partition_path:
            with open(partition_path) as fh:
                state["pr"] = PartitionResult.from_json(json.load(fh))
        else:
            state["pr"] = run_partition(threads=threads, bands=bands)
        pr = state["pr"]
        check_table(pr.table)
        return len(pr.classes) == 510, f"{len(pr.classes)} classes, {pr.a_quads} quadruples in A"

    def margins():
        ext = state["pr"].stage_extremes
        if sorted(ext) != [1, 2, 3]:
            return False, f"partition carries stage data for {sorted(ext)} only"
        limits = {1: bands.stage1, 2: bands.stage2, 3: bands.stage3}
        ok = all(ext[s]["max_low"] <= limits[s].low_max and ext[s]["min_high"] >= limits[s].high_min
                 for s in ext)
        return ok, "; ".join(f"stage {s}: low<={ext[s]['max_low']:.2g}, high>={ext[s]['min_high']:.2g}"
                             for s in sorted(ext))

    def f2():
        rep = crosscheck_f2(state["pr"])
        return rep["ok"], f"within {rep['within_pairs']}, cross {rep['cross_pairs']}"

    def ic2():
        from .ic2 import ic2_report

        rep = ic2_report(state["pr"].classes, state["pr"].class_orbit, bands)
        return rep["ok"], (f"{rep['dim13_classes']} dim-13 classes, max span {rep['max_span_dim']}, "
                           f"match {rep['intersection']['match_residual']:.2g}")

    results.append(_run("partition", partition))
    if "pr" in state:
        results += [_run("stage band margins", margins), _run("F2 crosscheck", f2), _run("I2 reconstruction", ic2)]
    return results
