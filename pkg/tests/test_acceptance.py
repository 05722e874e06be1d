"""The seven acceptance criteria, each printing one PASS/FAIL line.

Criteria 2 to 5 share the session sweep fixture; the others are
independent of it.
"""

import subprocess
import sys
import time
from collections import Counter
from pathlib import Path

import mpmath
import numpy as np
import pytest

import w160.wiman as wm
from w160.certlinalg import CertificationError, svd_verified
from w160.partition import EXPECTED_TABLE, crosscheck_f2
from w160.symplectic import brute_difference_multiset, predict_difference_multiset
from w160.tangency import DEFAULT_BANDS
from w160.witness import REFERENCE_WITNESS, Witness, corrupt_witness, verify_witness_exact

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def report(capsys):
    def emit(n, title, ok, info=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] AC{n} {title}: {info}")
    return emit


def _clear_model_caches():
    for name in dir(wm):
        f = getattr(wm, name)
        if callable(f) and hasattr(f, "cache_clear"):
            f.cache_clear()


def test_ac1_model_fidelity(report):
    _clear_model_caches()
    t0 = time.perf_counter()
    th = wm.enumerate_thetas()
    table_ok = len(th) == 160 and all(tuple(t.points) == tuple(wm.THETA_TABLE[k]) for k, t in enumerate(th))
    rep = wm.verify_points_on_curve()
    elapsed = time.perf_counter() - t0
    ok = table_ok and rep.exact_ok and rep.float_ok and rep.max_float_residual <= 1e-14 and elapsed < 1.0
    report(1, "model fidelity", ok,
           f"160 thetas match={table_ok}, exact={rep.exact_ok}, "
           f"float residual {rep.max_float_residual:.1e}, {elapsed:.2f}s")
    assert ok


@pytest.mark.sweep
def test_ac2_partition_theorem(report, partition_result):
    pr = partition_result
    census = sorted((r["pairs_per_class"], r["classes"], r["orbit_size"], r["orbits"]) for r in pr.table)
    orbits = Counter(pr.orbit_sizes)
    bands = {1: DEFAULT_BANDS.stage1, 2: DEFAULT_BANDS.stage2, 3: DEFAULT_BANDS.stage3}
    ext = pr.stage_extremes
    bands_ok = sorted(ext) == [1, 2, 3] and all(
        ext[s]["max_low"] <= b.low_max and ext[s]["min_high"] >= b.high_min for s, b in bands.items())
    ok = (len(pr.classes) == 510 and census == sorted(EXPECTED_TABLE)
          and orbits == Counter({5: 6, 40: 12}) and bands_ok)
    report(2, "partition theorem", ok,
           f"{pr.sweep_stats['representatives']} reps, {len(pr.classes)} classes, census {census}, "
           f"orbits {dict(orbits)}, stage extremes " +
           "; ".join(f"s{s} low<={ext[s]['max_low']:.1e} high>={ext[s]['min_high']:.2g}" for s in sorted(ext)) +
           f", {pr.sweep_stats.get('elapsed_seconds')}s")
    assert ok


@pytest.mark.sweep
def test_ac3_symplectic_oracle(report, partition_result):
    t0 = time.perf_counter()
    rep = crosscheck_f2(partition_result)
    fams = [(i, j) for i in range(5) for j in range(i + 1, 5)]
    diff_ok = all(predict_difference_multiset(a, b) == brute_difference_multiset(a, b)
                  for a in fams for b in fams)
    elapsed = time.perf_counter() - t0
    ok = rep["ok"] and rep["cross_family_triples_match"] and diff_ok and elapsed < 1.0
    report(3, "symplectic oracle", ok,
           f"table={rep['table_match']}, incidence={rep['incidence_match']}, "
           f"triples={rep['cross_family_triples_match']}, differences={diff_ok}, {elapsed:.2f}s")
    assert ok


@pytest.mark.sweep
def test_ac4_i2_reconstruction(report, ic2):
    good = [c for c in ic2["classes"] if c["span_dim"] == 13]
    blocks = {k: [c["block_norms"][k] for c in good] for k in ("R1", "R2", "R3", "R4", "R5")}
    blocks_ok = all(0.3 <= min(blocks[k]) and max(blocks[k]) <= 1 for k in ("R1", "R2", "R5")) and \
        max(blocks["R3"] + blocks["R4"]) < 1e-13
    inter = ic2["intersection"]
    ok = (len(good) >= 240 and blocks_ok and inter["intersection_dim"] == 3
          and inter["match_residual"] <= 1e-12 and ic2["ok"])
    report(4, "I2 reconstruction", ok,
           f"{len(good)} classes of span 13, R1/R2/R5 in "
           f"[{min(min(blocks[k]) for k in ('R1', 'R2', 'R5')):.2f}, "
           f"{max(max(blocks[k]) for k in ('R1', 'R2', 'R5')):.2f}], "
           f"R3/R4 <= {max(blocks['R3'] + blocks['R4']):.1e}, intersection dim {inter['intersection_dim']}, "
           f"match {inter['match_residual']:.1e}")
    assert ok


@pytest.mark.sweep
def test_ac5_exact_witness(report, witness_class):
    cid, pairs = witness_class
    t0 = time.perf_counter()
    good = verify_witness_exact(Witness(list(REFERENCE_WITNESS)), pairs)
    bad = verify_witness_exact(corrupt_witness(Witness(list(REFERENCE_WITNESS)), class_pairs=pairs), pairs)
    elapsed = time.perf_counter() - t0
    ok = good.ok and good.spans_class and good.is_tree and not bad.ok
    report(5, "exact witness", ok,
           f"23 quadruples ranks {sorted(set(c.rank for c in good.checks))}, spans class {cid} "
           f"({len(pairs)} pairs)={good.spans_class}; corrupted control ok={bad.ok}, {elapsed:.1f}s")
    assert ok


def _random_matrix(rng):
    m, n = (int(v) for v in rng.integers(1, 49, 2))
    A = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    if rng.random() < 0.5:
        r = int(rng.integers(0, min(m, n) + 1))
        A = (rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))) @ \
            (rng.standard_normal((r, n)) + 1j * rng.standard_normal((r, n)))
    mx = np.abs(A).max()
    return A / mx if mx else A


def test_ac6_certified_svd(report):
    rng = np.random.default_rng(2024)
    mats = [_random_matrix(rng) for _ in range(1000)]
    failures = 0
    worst_recon = worst_unit = 0.0
    norm_ok = True
    svds = []
    for A in mats:
        try:
            s = svd_verified(A)
        except CertificationError:
            failures += 1
            svds.append(None)
            continue
        svds.append(s)
        worst_recon = max(worst_recon, s.residual_recon)
        worst_unit = max(worst_unit, s.residual_unitary)
        norm_ok &= abs(np.linalg.norm(A, 2) - s.D[0]) <= s.spectral_perturbation
    mpmath.mp.dps = 40
    enclosure_ok = True
    worst_ratio = 0.0
    for k in rng.choice(1000, 50, replace=False):
        A, s = mats[k], svds[k]
        if s is None:
            continue
        M = mpmath.matrix([[mpmath.mpc(complex(z)) for z in row] for row in A])
        true = sorted((mpmath.mpf(x) for x in mpmath.svd_c(M, compute_uv=False)), reverse=True)
        dev = max(abs(t - mpmath.mpf(float(d))) for t, d in zip(true, s.D))
        enclosure_ok &= dev <= s.spectral_perturbation
        worst_ratio = max(worst_ratio, float(dev) / s.spectral_perturbation if s.spectral_perturbation else 0.0)
    ok = failures == 0 and worst_recon <= 3e-14 and worst_unit <= 1e-14 and norm_ok and enclosure_ok
    report(6, "certified SVD", ok,
           f"1000 matrices, {failures} residual failures, worst recon {worst_recon:.1e}, "
           f"unitary {worst_unit:.1e}; 50 high-precision enclosures hold={enclosure_ok} "
           f"(worst deviation/perturbation {worst_ratio:.2g})")
    assert ok


def test_ac7_property_suites(report):
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           str(ROOT / "tests" / "test_properties.py")],
                          capture_output=True, text=True, cwd=ROOT)
    elapsed = time.perf_counter() - t0
    last = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = proc.returncode == 0
    report(7, "property suites in isolation", ok, f"{last} ({elapsed:.1f}s)")
    assert ok, proc.stdout[-2000:]
