"""Report documents shared by the CLI: results, verification, comparison, bench."""
from __future__ import annotations

import csv
import io
import json
import math
import time

import numpy as np

from . import __version__
from .diagnostics import (
    CheckResult,
    Guarantee,
    SpectralReport,
    guarantee_margin,
    spectral_report,
    trace_checks,
)
from .errors import BarrierBreach, CapExceeded, FingerprintMismatch, KSError, SelectionMismatch, TraceMissing
from .frames import Frame, frame_fingerprint, harmonic_frame, random_phase_frame, rotate_frame
from .oracle import DEFAULT_CAP, REPLAY_MAX_M, brute_force_balanced, verify_selection_trace
from .solver import IterationRecord, PartitionResult, SolverConfig, TraceLevel, solve

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_FAIL = 2
EXIT_BREACH = 3
EXIT_NOT_APPLICABLE = 4
EXIT_FINGERPRINT = 5

BENCH_COLUMNS = (
    "d",
    "m",
    "kind",
    "seed",
    "algorithm",
    "iterations",
    "wall_seconds",
    "theta",
    "lambda_min_A",
    "lambda_max_A",
    "x_bound",
    "logdet_IA",
    "guarantee",
)

TIMING_KEY = "timing"


def jsonable(obj):
    """Recursively replace non-finite floats with None."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps(doc) -> str:
    return json.dumps(jsonable(doc), indent=2, allow_nan=False) + "\n"


def strip_timing(doc):
    """Copy of a report with every timing field removed (for reproducibility checks)."""
    if isinstance(doc, dict):
        return {k: strip_timing(v) for k, v in doc.items() if k not in (TIMING_KEY, "wall_seconds")}
    if isinstance(doc, list):
        return [strip_timing(v) for v in doc]
    return doc


def manifest(command, frame: Frame | None, config=None, seeds=(), timing=None):
    return {
        "tool": "ksgreedy",
        "version": __version__,
        "command": list(command),
        "frame_fingerprint": frame_fingerprint(frame) if frame is not None else None,
        "config": config.to_dict() if config is not None else None,
        "seeds": list(seeds),
        TIMING_KEY: dict(timing or {}),
    }


def exit_code_for(verdict: Guarantee) -> int:
    return {
        Guarantee.PASS34: EXIT_PASS,
        Guarantee.FAIL: EXIT_FAIL,
        Guarantee.NOT_APPLICABLE: EXIT_NOT_APPLICABLE,
    }[verdict]


def solve_document(f: Frame, cfg: SolverConfig, command=()):
    """Run a solver and build the result document. Returns (doc, exit_code)."""
    t0 = time.perf_counter()
    try:
        result = solve(f, cfg)
    except BarrierBreach as exc:
        t1 = time.perf_counter()
        doc = {
            "manifest": manifest(command, f, cfg, timing={"solve": t1 - t0}),
            "s1": None,
            "s2": None,
            "trace": [],
            "spectral_report": None,
            "margins": None,
            "error": {"type": "BarrierBreach", "iteration": exc.iteration, "message": str(exc)},
            "exit_code": EXIT_BREACH,
        }
        return doc, EXIT_BREACH
    t1 = time.perf_counter()
    report = spectral_report(f, result, f.regime)
    margins = guarantee_margin(report, f.regime, cfg.algorithm, m=f.m, d=f.d)
    t2 = time.perf_counter()
    code = exit_code_for(report.guarantee)
    doc = {
        "manifest": manifest(command, f, cfg, timing={"solve": t1 - t0, "report": t2 - t1}),
        "s1": list(result.s1),
        "s2": list(result.s2),
        "iterations": result.iterations,
        "regime": f.regime.value,
        "trace": [r.to_dict() for r in result.trace],
        "spectral_report": report.to_dict(),
        "margins": margins.to_dict(),
        "exit_code": code,
    }
    return doc, code


def result_from_document(doc) -> PartitionResult:
    if doc.get("s1") is None:
        raise KSError("result document holds no partition")
    cfg = SolverConfig.from_dict(doc["manifest"]["config"])
    trace = tuple(IterationRecord.from_dict(r) for r in doc.get("trace", []))
    return PartitionResult(
        s1=tuple(int(i) for i in doc["s1"]),
        s2=tuple(int(i) for i in doc["s2"]),
        trace=trace,
        config=cfg,
        fingerprint=doc["manifest"]["frame_fingerprint"],
        iterations=int(doc.get("iterations", len(trace))),
    )


def _report_consistency(stored, fresh: SpectralReport) -> CheckResult:
    name = "spectral_report_consistent"
    if stored is None:
        return CheckResult(name, False, True, None, "result has no spectral report")
    old = SpectralReport.from_dict(stored)
    worst = 0.0
    for key, value in fresh.to_dict().items():
        if key == "guarantee" or value is None:
            continue
        worst = max(worst, abs(getattr(old, key) - value))
    ok = worst <= 1e-9 and old.guarantee is fresh.guarantee
    return CheckResult(name, ok, True, worst, f"max field drift {worst:.3e}, stored verdict {old.guarantee.value}")


def verify_documents(f: Frame, result_doc, command=()):
    """Re-check a stored result against its frame. Returns (doc, exit_code).

    Raises FingerprintMismatch if the result was produced for another frame.
    """
    fp = frame_fingerprint(f)
    claimed = result_doc.get("manifest", {}).get("frame_fingerprint")
    if fp != claimed:
        raise FingerprintMismatch(f"frame fingerprint {fp[:16]}... does not match result's {str(claimed)[:16]}...")
    checks = []
    t0 = time.perf_counter()
    if result_doc.get("s1") is None:
        checks.append(CheckResult("run_completed", False, True, None, "result records a failed run"))
    else:
        result = result_from_document(result_doc)
        report = spectral_report(f, result, f.regime)
        checks.append(_report_consistency(result_doc.get("spectral_report"), report))
        checks.append(
            CheckResult(
                "guarantee_window",
                report.guarantee is not Guarantee.FAIL,
                True,
                report.worst_side,
                f"verdict {report.guarantee.value}",
            )
        )
        checks.extend(trace_checks(f, result, report))
        full = result.config.record_trace is TraceLevel.FULL and len(result.trace) == result.iterations
        if full and f.m <= REPLAY_MAX_M:
            try:
                verify_selection_trace(f, result)
                checks.append(CheckResult("selection_replay", True, True, None, "every choice matches"))
            except (SelectionMismatch, TraceMissing) as exc:
                checks.append(CheckResult("selection_replay", False, True, None, str(exc)))
        else:
            checks.append(CheckResult("selection_replay", True, False, None, "needs a full trace and m <= 512"))
    failed = [c.name for c in checks if not c.passed]
    doc = {
        "manifest": manifest(command, f, seeds=(), timing={"verify": time.perf_counter() - t0}),
        "result_manifest": strip_timing(result_doc.get("manifest", {})),
        "checks": [c.to_dict() for c in checks],
        "failed": failed,
        "passed": not failed,
    }
    return doc, (EXIT_PASS if not failed else EXIT_ERROR)


def _row(method, f, result, seconds, status="ok"):
    rep = spectral_report(f, result)
    return {
        "method": method,
        "theta": rep.theta,
        "lambda_min_A": rep.lambda_min_A,
        "lambda_max_A": rep.lambda_max_A,
        "lambda_min_IA": rep.lambda_min_IA,
        "lambda_max_IA": rep.lambda_max_IA,
        "logdet_IA": rep.logdet_IA,
        "wall_seconds": seconds,
        "status": status,
    }


def compare_document(f: Frame, seed=0, cap=DEFAULT_CAP, command=()):
    """Table of barrier, plain, exhaustive and random balanced partitions."""
    rows = []
    notes = []
    for alg in ("barrier", "plain"):
        cfg = SolverConfig(algorithm=alg, record_trace="off", odd_m_policy="larger-first-set")
        t0 = time.perf_counter()
        try:
            res = solve(f, cfg)
        except BarrierBreach as exc:
            rows.append({"method": alg, "status": f"BarrierBreach at iteration {exc.iteration}",
                         "wall_seconds": time.perf_counter() - t0})
            continue
        rows.append(_row(alg, f, res, time.perf_counter() - t0))
    t0 = time.perf_counter()
    try:
        orc = brute_force_balanced(f, cap)
        s1 = set(orc.best_partition)
        res = PartitionResult(tuple(sorted(s1)), tuple(i for i in range(f.m) if i not in s1), (), SolverConfig(), "", 0)
        row = _row("oracle", f, res, time.perf_counter() - t0)
        row["evaluated_count"] = orc.evaluated_count
        rows.append(row)
    except CapExceeded as exc:
        notes.append(f"oracle omitted: {exc}")
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    perm = rng.permutation(f.m)
    s1 = tuple(sorted(int(i) for i in perm[: f.m // 2]))
    res = PartitionResult(s1, tuple(i for i in range(f.m) if i not in set(s1)), (), SolverConfig(), "", 0)
    rows.append(_row("random-balanced", f, res, time.perf_counter() - t0))
    d, m = f.d, f.m
    doc = {
        "manifest": manifest(command, f, seeds=[seed]),
        "d": d,
        "m": m,
        "regime": f.regime.value,
        "logdet_floor": -d * math.log(2.0) - 2.0 * d * d / m,
        "logdet_reference_scale": -d * math.log(2.0) - d * d / m,
        "rows": rows,
        "notes": notes,
    }
    return doc


def make_frame(d: int, m: int, kind: str, seed: int) -> Frame:
    base = harmonic_frame(d, m)
    if kind == "harmonic":
        return base
    if kind == "rotated":
        return rotate_frame(base, seed)
    if kind == "phased":
        return random_phase_frame(base, seed)
    raise ValueError(f"unknown frame kind {kind!r} (expected harmonic, rotated or phased)")


def parse_case(text: str) -> dict:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 5:
        raise ValueError(f"case {text!r} must read d,m,kind,seed,algorithm")
    return {"d": int(parts[0]), "m": int(parts[1]), "kind": parts[2], "seed": int(parts[3]), "algorithm": parts[4]}


def bench_rows(cases, repeats=1):
    """One row per (case, repeat); failures become rows instead of aborting."""
    rows = []
    for case in cases:
        for _ in range(max(1, int(repeats))):
            row = {k: case.get(k) for k in ("d", "m", "kind", "seed", "algorithm")}
            try:
                f = make_frame(int(case["d"]), int(case["m"]), case["kind"], int(case["seed"]))
                cfg = SolverConfig(algorithm=case["algorithm"], record_trace="off")
                t0 = time.perf_counter()
                res = solve(f, cfg)
                row["wall_seconds"] = time.perf_counter() - t0
                rep = spectral_report(f, res, f.regime)
                row.update(
                    iterations=res.iterations,
                    theta=rep.theta,
                    lambda_min_A=rep.lambda_min_A,
                    lambda_max_A=rep.lambda_max_A,
                    x_bound=rep.x_bound,
                    logdet_IA=rep.logdet_IA,
                    guarantee=rep.guarantee.value,
                )
            except BarrierBreach as exc:
                row.update(iterations=exc.iteration, guarantee="BarrierBreach")
            except (KSError, ValueError) as exc:
                row.update(guarantee=f"Error:{type(exc).__name__}")
            rows.append(row)
    return rows


def bench_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in BENCH_COLUMNS})
    return buf.getvalue()
