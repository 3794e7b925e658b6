"""Command-line front end.

Every command writes exactly one document to stdout (JSON, or CSV for
``bench``).  ``solve`` exits 0 when both sides of the partition stay within
3/4, 2 when a covered guarantee failed, 3 on a barrier breach and 4 when an
off-regime run missed the window.  ``verify`` exits 1 on any failed check and
5 when the result belongs to a different frame.  Input errors exit 1.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__, reports
from .errors import FingerprintMismatch, KSError
from .frames import (
    direct_sum,
    frame_from_dict,
    frame_fingerprint,
    harmonic_frame,
    load_frame,
    random_phase_frame,
    require_valid,
    rotate_frame,
    save_frame,
    validate_frame,
)
from .oracle import DEFAULT_CAP
from .solver import SolverConfig


def _parse_rows(text):
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser():
    p = argparse.ArgumentParser(prog="ksgreedy", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write an equal-norm Parseval frame")
    g.add_argument("-d", type=int, help="dimension")
    g.add_argument("-m", type=int, help="number of vectors")
    g.add_argument("--kind", choices=["harmonic", "rotated", "phased", "direct-sum"], default="harmonic")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--rows", type=_parse_rows, default=None, help="comma-separated DFT rows (harmonic base)")
    g.add_argument("--inputs", nargs=2, metavar="FRAME", help="two frame files for --kind direct-sum")
    g.add_argument("--out", type=Path, default=None)

    s = sub.add_parser("solve", help="partition a frame with one of the greedy algorithms")
    s.add_argument("frame", type=Path)
    s.add_argument("--algorithm", choices=["barrier", "plain"], default="barrier")
    s.add_argument("--trace", choices=["full", "spectral", "off"], default="full")
    s.add_argument("--allow-odd", action="store_true", help="odd m: the returned set is the larger one")
    s.add_argument("--threads", type=int, default=0, help="candidate-evaluation threads (0 = auto)")
    s.add_argument("--out", type=Path, default=None)

    v = sub.add_parser("verify", help="re-check a result file against its frame")
    v.add_argument("frame", type=Path)
    v.add_argument("result", type=Path)
    v.add_argument("--out", type=Path, default=None)

    c = sub.add_parser("compare", help="greedy vs exhaustive vs random balanced partitions")
    c.add_argument("frame", type=Path)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--cap", type=int, default=DEFAULT_CAP)
    c.add_argument("--out", type=Path, default=None)

    b = sub.add_parser("bench", help="time solver runs and report their margins as CSV")
    b.add_argument("--case", action="append", default=[], metavar="d,m,kind,seed,algorithm")
    b.add_argument("--cases-file", type=Path, default=None, help="JSON list of case objects")
    b.add_argument("--repeats", type=int, default=1)
    b.add_argument("--out", type=Path, default=None)
    return p


def _emit(text, out=None):
    if out is not None:
        Path(out).write_text(text)
    sys.stdout.write(text)


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def cmd_generate(args, argv):
    if args.kind == "direct-sum":
        if not args.inputs:
            raise ValueError("--kind direct-sum needs --inputs FRAME FRAME")
        f = direct_sum(load_frame(args.inputs[0]), load_frame(args.inputs[1]))
    else:
        if args.d is None or args.m is None:
            raise ValueError("-d and -m are required")
        f = harmonic_frame(args.d, args.m, args.rows)
        if args.kind == "rotated":
            f = rotate_frame(f, args.seed)
        elif args.kind == "phased":
            f = random_phase_frame(f, args.seed)
    report = require_valid(f)
    out = args.out or Path(f"frame_d{f.d}_m{f.m}_{args.kind}_s{args.seed}.json")
    save_frame(f, out)
    doc = {
        "manifest": reports.manifest(argv, f, seeds=[args.seed]),
        "out": str(out),
        "d": f.d,
        "m": f.m,
        "alpha": f.alpha,
        "regime": f.regime.value,
        "validation": report.to_dict(),
    }
    sys.stdout.write(reports.dumps(doc))
    return reports.EXIT_PASS


def cmd_solve(args, argv):
    f = load_frame(args.frame)
    cfg = SolverConfig(
        algorithm=args.algorithm,
        record_trace=args.trace,
        odd_m_policy="larger-first-set" if args.allow_odd else "reject",
        candidate_parallelism=args.threads,
    )
    doc, code = reports.solve_document(f, cfg, argv)
    text = reports.dumps(doc)
    if args.out is not None:
        Path(args.out).write_text(text)
        summary = {
            "out": str(args.out),
            "exit_code": code,
            "regime": f.regime.value,
            "spectral_report": doc["spectral_report"],
            "error": doc.get("error"),
        }
        sys.stdout.write(reports.dumps(summary))
    else:
        sys.stdout.write(text)
    if code == reports.EXIT_BREACH:
        print(doc["error"]["message"], file=sys.stderr)
    return code


def cmd_verify(args, argv):
    raw = frame_from_dict(_read_json(args.frame), validate=False)
    result_doc = _read_json(args.result)
    claimed = result_doc.get("manifest", {}).get("frame_fingerprint")
    if frame_fingerprint(raw) != claimed:
        raise FingerprintMismatch(f"{args.frame} does not match the frame recorded in {args.result}")
    valid = validate_frame(raw)
    if not valid.passed:
        doc = {
            "manifest": reports.manifest(argv, raw),
            "checks": [{"name": "frame_valid", "passed": False, "applicable": True,
                        "worst": valid.parseval_error, "detail": "; ".join(valid.failures())}],
            "failed": ["frame_valid"],
            "passed": False,
        }
        _emit(reports.dumps(doc), args.out)
        return reports.EXIT_ERROR
    doc, code = reports.verify_documents(raw, result_doc, argv)
    _emit(reports.dumps(doc), args.out)
    for name in doc["failed"]:
        print(f"check failed: {name}", file=sys.stderr)
    return code


def cmd_compare(args, argv):
    f = load_frame(args.frame)
    doc = reports.compare_document(f, seed=args.seed, cap=args.cap, command=argv)
    _emit(reports.dumps(doc), args.out)
    return reports.EXIT_PASS


def cmd_bench(args, argv):
    cases = [reports.parse_case(c) for c in args.case]
    if args.cases_file is not None:
        cases.extend(_read_json(args.cases_file))
    t0 = time.perf_counter()
    rows = reports.bench_rows(cases, args.repeats)
    _emit(reports.bench_csv(rows), args.out)
    print(f"bench: {len(rows)} rows in {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return reports.EXIT_PASS


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "compare": cmd_compare,
    "bench": cmd_bench,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, argv)
    except FingerprintMismatch as exc:
        print(f"error: FingerprintMismatch: {exc}", file=sys.stderr)
        return reports.EXIT_FINGERPRINT
    except (KSError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return reports.EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
