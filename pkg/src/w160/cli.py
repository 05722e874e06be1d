"""Command line entry points.

Subcommands::

    partition [--threads N] [--out PATH]
    certify-ic2 [--partition PATH] [--out PATH]
    witness find [--partition PATH] [--class-id N] [--file PATH]
    witness verify [--file PATH] [--partition PATH]
    export-model [--out PATH]
    selftest [--partition PATH] [--quick]

Every artifact is JSON with a top-level ``schema_version`` and a
``generated_at`` timestamp; apart from that field, reruns with the same
configuration produce identical files.  Exact field elements are written
as 8 ``[numerator, denominator]`` pairs over the basis ``a^m i^e``
(coordinate ``k`` is ``a^(k % 4) i^(k // 4)``); complex floats as
``[re, im]`` in shortest round-trip notation.

The default worker count comes from ``W160_THREADS``.  Band flags take
three numbers ``LOW_MAX HIGH_MIN HIGH_MAX``; overrides are recorded in the
output.  On a certification failure a one-line JSON record goes to
stderr and the exit status identifies the failing step (see ``EXIT``).
"""

from __future__ import annotations

import argparse
import datetime
import json
import logging
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
THREADS_ENV = "W160_THREADS"

EXIT = {
    "ok": 0,
    "usage": 2,
    "model": 3,
    "partition": 4,
    "f2-crosscheck": 5,
    "ic2": 6,
    "witness": 7,
    "selftest": 8,
    "svd": 9,
}

log = logging.getLogger("w160")


class Failure(Exception):
    def __init__(self, kind: str, message: str, detail: dict | None = None):
        super().__init__(message)
        self.kind = kind
        self.detail = detail or {}


def _stamp(payload: dict, config: dict) -> dict:
    out = {"schema_version": SCHEMA_VERSION,
           "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")}
    out["config"] = config
    out.update(payload)
    return out


def _write(path: str | Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, default=_json_default)
        fh.write("\n")
    log.info("wrote %s", path)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (complex, np.complexfloating)):
        return [float(o.real), float(o.imag)]
    if isinstance(o, float) and math.isinf(o):
        return None
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _read(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)


# -- configuration --------------------------------------------------------------


def _bands(args):
    from .tangency import DEFAULT_BANDS, Band

    bands = DEFAULT_BANDS
    overrides = {}
    for name in ("stage1", "stage2", "stage3", "span"):
        val = getattr(args, f"{name}_band", None)
        if val is not None:
            lo, hi, top = val
            if not (0 <= lo < hi <= top):
                raise Failure("usage", f"{name} band must satisfy 0 <= LOW_MAX < HIGH_MIN <= HIGH_MAX")
            bands = replace(bands, **{name: Band(lo, hi, top)})
            overrides[name] = [lo, hi, top]
    if overrides:
        log.warning("band overrides in effect: %s", overrides)
    return bands, overrides


def _threads(args) -> int | None:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get(THREADS_ENV)
    return int(env) if env else None


# -- commands ---------------------------------------------------------------


def cmd_export_model(args) -> int:
    from .wiman import all_points, thetas, verify_points_on_curve

    report = verify_points_on_curve()
    if not (report.exact_ok and report.float_ok):
        raise Failure("model", "curve points fail the defining quadrics", report.__dict__)
    points = [{
        "index": p.index,
        "zero_coord": p.zero_coord,
        "exact": [c.to_json() for c in p.coords_exact],
        "float": [[float(z.real), float(z.imag)] for z in p.coords_float],
        "bounds": [float(b) for b in p.coord_bounds],
    } for p in all_points()]
    th = [{"index": t.index, "points": list(t.points), "family": list(t.family)} for t in thetas()]
    _write(args.out, _stamp({"points": points, "thetas": th,
                             "max_float_residual": report.max_float_residual}, {"command": "export-model"}))
    return 0


def cmd_partition(args) -> int:
    from .partition import PartitionError, crosscheck_f2, run_partition

    bands, overrides = _bands(args)
    threads = _threads(args)
    try:
        result = run_partition(threads=threads, bands=bands)
    except PartitionError as e:
        raise Failure("partition", str(e)) from e
    f2 = crosscheck_f2(result)
    payload = result.to_json()
    payload["f2_crosscheck"] = f2
    config = {"command": "partition", "threads": threads, "band_overrides": overrides}
    _write(args.out, _stamp(payload, config))
    print(f"{len(result.classes)} classes; census " +
          ", ".join(f"{r['classes']}x{r['pairs_per_class']}" for r in result.table))
    if not f2["ok"]:
        raise Failure("f2-crosscheck", "numerical partition disagrees with the F2 model", f2)
    return 0


def _load_partition(path):
    from .partition import PartitionResult

    if not Path(path).exists():
        raise Failure("usage", f"{path} not found; run the partition command first")
    return PartitionResult.from_json(_read(path))


def cmd_certify_ic2(args) -> int:
    from .ic2 import ic2_report

    bands, overrides = _bands(args)
    pr = _load_partition(args.partition)
    rep = ic2_report(pr.classes, pr.class_orbit, bands)
    _write(args.out, _stamp(rep, {"command": "certify-ic2", "partition": str(args.partition),
                                  "band_overrides": overrides}))
    inter = rep["intersection"]
    print(f"{rep['dim13_classes']} classes with 13-dim span; intersection dim "
          f"{inter['intersection_dim']}, match residual {inter['match_residual']:.2g}")
    if not rep["ok"]:
        raise Failure("ic2", "I2 reconstruction did not certify",
                      {k: rep[k] for k in ("dim13_classes", "block_checks_ok", "max_span_dim")})
    return 0


def cmd_witness(args) -> int:
    from .witness import REFERENCE_WITNESS, Witness, WitnessError, find_witness, recover_pairs, verify_witness_exact

    if args.action == "find":
        pr = _load_partition(args.partition)
        cid = args.class_id if args.class_id is not None else pr.class_of_pair()[(0, 9)]
        w = find_witness(pr.classes[cid], cid)
        if w is None:
            raise Failure("witness", f"class {cid} has a disconnected pair graph; no witness")
        payload = _stamp(w.to_json(), {"command": "witness find", "class_id": cid})
        _write(args.file, payload)
        print(f"class {cid}: {len(w.quadruples)} quadruples")
        return 0
    if args.file:
        try:
            w = Witness.from_json(_read(args.file))
        except (WitnessError, KeyError, ValueError) as e:
            raise Failure("usage", f"cannot read witness: {e}") from e
        source = str(args.file)
    else:
        w = Witness(list(REFERENCE_WITNESS))
        source = "built-in 23-quadruple list"
    class_pairs = None
    if args.partition and Path(args.partition).exists():
        pr = _load_partition(args.partition)
        cid = w.class_id
        if cid is None:
            try:
                partner = recover_pairs(w.quadruples)
            except WitnessError:
                partner = None  # malformed; verification reports it
            if partner:
                t = w.quadruples[0][0]
                cid = pr.class_of_pair()[tuple(sorted((t, partner[t])))]
        if cid is not None:
            class_pairs = pr.classes[cid]
    cert = verify_witness_exact(w, class_pairs)
    print(f"{source}: {sum(c.ok for c in cert.checks)}/{len(cert.checks)} quadruples exact-deficient, "
          f"tree={cert.is_tree}, spans class={cert.spans_class}")
    if not cert.ok:
        raise Failure("witness", "witness failed exact verification", cert.to_json())
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    bands, overrides = _bands(args)
    results = run_selftest(partition_path=args.partition, quick=args.quick, bands=bands,
                           threads=_threads(args))
    width = max(len(name) for name, _, _ in results)
    for name, ok, info in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {info}")
    failed = [name for name, ok, _ in results if not ok]
    if failed:
        raise Failure("selftest", f"{len(failed)} checks failed", {"failed": failed})
    return 0


# -- parser -----------------------------------------------------------------


def _add_bands(p):
    for name in ("stage1", "stage2", "stage3", "span"):
        p.add_argument(f"--{name}-band", nargs=3, type=float, metavar=("LOW_MAX", "HIGH_MIN", "HIGH_MAX"),
                       help=f"override the {name} bands")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="w160", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="sweep all 4-subsets and build the Steiner partition")
    p.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or all)")
    p.add_argument("--out", default="partition.json")
    _add_bands(p)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("certify-ic2", help="recover I2 from the partition")
    p.add_argument("--partition", default="partition.json")
    p.add_argument("--out", default="ic2_report.json")
    _add_bands(p)
    p.set_defaults(func=cmd_certify_ic2)

    p = sub.add_parser("witness", help="find or exactly verify a spanning-tree witness")
    p.add_argument("action", choices=("find", "verify"))
    p.add_argument("--file", help="witness.json to write (find) or read (verify; default: the built-in list)")
    p.add_argument("--partition", default="partition.json")
    p.add_argument("--class-id", type=int)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("export-model", help="write the 40 points and 160 thetas")
    p.add_argument("--out", default="model.json")
    p.set_defaults(func=cmd_export_model)

    p = sub.add_parser("selftest", help="run the consolidated cross-checks")
    p.add_argument("--partition", help="reuse a partition.json instead of sweeping")
    p.add_argument("--quick", action="store_true", help="skip checks that need the partition")
    p.add_argument("--threads", type=int)
    _add_bands(p)
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "witness" and args.action == "find" and not args.file:
        args.file = "witness.json"
    from .certlinalg import CertificationError

    try:
        return args.func(args)
    except Failure as f:
        print(json.dumps({"failure": f.kind, "message": str(f), "detail": f.detail},
                         default=_json_default), file=sys.stderr)
        return EXIT.get(f.kind, 1)
    except CertificationError as e:
        print(json.dumps({"failure": "svd", "message": str(e)}), file=sys.stderr)
        return EXIT["svd"]


if __name__ == "__main__":
    sys.exit(main())
