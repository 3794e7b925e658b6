"""Deterministic greedy two-way partitioning of an equal-norm Parseval frame.

Both algorithms grow a set one vector at a time.  The barrier variant keeps
a moving upper barrier u_j = 1/2 + j * alpha / d and picks the vector that
maximises det(u_{j+1} I - A_j - v v*); the plain variant fixes the barrier at
1.  By the matrix determinant lemma,

    det(M - v v*) = det(M) * (1 - v* M^{-1} v),

so both selections reduce to minimising the quadratic form v* M^{-1} v over
the unpicked vectors, with M = u_{j+1} I - A_j (or I - A_j).
"""
from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import linalg
from .errors import BarrierBreach, InvalidFrame, NotPositiveDefinite
from .frames import Frame, frame_fingerprint, require_valid

TIE_TOL = 1e-12
U0 = 0.5
AUTO_PARALLEL_THRESHOLD = 50_000


class Algorithm(str, enum.Enum):
    BARRIER = "barrier"
    PLAIN = "plain"


class TieBreak(str, enum.Enum):
    LOWEST_INDEX = "lowest-index"


class OddMPolicy(str, enum.Enum):
    REJECT = "reject"
    LARGER_FIRST_SET = "larger-first-set"


class TraceLevel(str, enum.Enum):
    FULL = "full"
    # only the record of the final iteration
    SPECTRAL = "spectral"
    OFF = "off"


@dataclass(frozen=True)
class SolverConfig:
    algorithm: Algorithm = Algorithm.BARRIER
    tie_break: TieBreak = TieBreak.LOWEST_INDEX
    odd_m_policy: OddMPolicy = OddMPolicy.REJECT
    record_trace: TraceLevel = TraceLevel.FULL
    candidate_parallelism: int = 0

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        object.__setattr__(self, "tie_break", TieBreak(self.tie_break))
        object.__setattr__(self, "odd_m_policy", OddMPolicy(self.odd_m_policy))
        object.__setattr__(self, "record_trace", TraceLevel(self.record_trace))
        if int(self.candidate_parallelism) < 0:
            raise ValueError("candidate_parallelism must be non-negative")

    def to_dict(self):
        return {
            "algorithm": self.algorithm.value,
            "tie_break": self.tie_break.value,
            "odd_m_policy": self.odd_m_policy.value,
            "record_trace": self.record_trace.value,
            "candidate_parallelism": int(self.candidate_parallelism),
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(**doc)


@dataclass(frozen=True)
class IterationRecord:
    """State after iteration j.

    ``u_j`` is the barrier used for the selection (u_{j+1}); ``potential``,
    ``gap_c``, ``kappa_shift`` and ``trace_shift`` describe the shifted
    matrix u_{j+1} I - A_{j+1} after the chosen vector was added.
    """

    j: int
    chosen: int
    u_j: float
    q_value: float
    potential: float
    gap_c: float
    kappa_shift: float
    trace_shift: float

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, doc):
        return cls(
            j=int(doc["j"]),
            chosen=int(doc["chosen"]),
            u_j=float(doc["u_j"]),
            q_value=float(doc["q_value"]),
            potential=float(doc["potential"]),
            gap_c=float(doc["gap_c"]),
            kappa_shift=float(doc["kappa_shift"]),
            trace_shift=float(doc["trace_shift"]),
        )


@dataclass(frozen=True)
class PartitionResult:
    s1: tuple
    s2: tuple
    trace: tuple
    config: SolverConfig
    fingerprint: str
    iterations: int = field(default=0)

    @property
    def chosen_order(self):
        return [r.chosen for r in self.trace]


def _resolve_workers(cfg: SolverConfig, n_candidates: int) -> int:
    if cfg.candidate_parallelism > 0:
        return cfg.candidate_parallelism
    if n_candidates >= AUTO_PARALLEL_THRESHOLD:
        return min(os.cpu_count() or 1, 8)
    return 1


def _candidate_forms(factor, Vt, idx, workers, pool):
    if workers <= 1 or pool is None or idx.size < 2 * workers:
        return linalg.quadratic_forms(factor, Vt[:, idx])
    chunks = np.array_split(idx, workers)
    parts = pool.map(lambda c: linalg.quadratic_forms(factor, Vt[:, c]), chunks)
    return np.concatenate(list(parts))


def pick_lowest(values: np.ndarray) -> int:
    """Position of the minimum, preferring the earliest entry within TIE_TOL."""
    vmin = values.min()
    return int(np.argmax(values <= vmin + TIE_TOL))


def select_next(candidates, M: linalg.HermitianMatrix, f: Frame):
    """Candidate minimising v* M^{-1} v, lowest index on ties.

    Returns ``(index, q_value)``.  Raises NotPositiveDefinite if M is not
    positive definite.
    """
    idx = np.asarray(sorted(candidates), dtype=np.intp)
    if idx.size == 0:
        raise ValueError("no candidates left")
    factor = linalg.cholesky(M)
    q = linalg.quadratic_forms(factor, f.vectors.T[:, idx])
    pos = pick_lowest(q)
    return int(idx[pos]), float(q[pos])


def _iteration_count(f: Frame, cfg: SolverConfig) -> int:
    if f.m % 2 == 0:
        return f.m // 2
    if cfg.odd_m_policy is OddMPolicy.LARGER_FIRST_SET:
        return (f.m + 1) // 2
    raise InvalidFrame(f"m={f.m} is odd; use odd_m_policy=larger-first-set to allow it")


def _record(j, chosen, u, q, A):
    shift = linalg.shifted(A, u)
    try:
        potential = -linalg.log_det(shift)
    except NotPositiveDefinite as exc:
        raise BarrierBreach(j, f"shifted matrix lost positive definiteness at iteration {j}") from exc
    w = linalg.hermitian_eigenvalues(shift)
    return IterationRecord(
        j=j,
        chosen=chosen,
        u_j=u,
        q_value=q,
        potential=potential,
        gap_c=float(w[-1]),
        kappa_shift=float(w[0] / w[-1]),
        trace_shift=shift.trace(),
    )


def _run(f: Frame, cfg: SolverConfig, barrier: bool) -> PartitionResult:
    require_valid(f)
    n_iter = _iteration_count(f, cfg)
    d, m = f.d, f.m
    delta = f.alpha / d
    Vt = np.ascontiguousarray(f.vectors.T)
    remaining = np.ones(m, dtype=bool)
    A = linalg.HermitianMatrix.zeros(d)
    trace = []
    workers = _resolve_workers(cfg, m)
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for j in range(n_iter):
            u = U0 + (j + 1) * delta if barrier else 1.0
            M = linalg.shifted(A, u)
            try:
                factor = linalg.cholesky(M)
            except NotPositiveDefinite as exc:
                raise BarrierBreach(j, f"u I - A_j is not positive definite at iteration {j}") from exc
            idx = np.flatnonzero(remaining)
            q = _candidate_forms(factor, Vt, idx, workers, pool)
            pos = pick_lowest(q)
            qmin = float(q[pos])
            if not qmin < 1.0:
                raise BarrierBreach(j, f"every candidate breaches the barrier at iteration {j} (min form {qmin:.6g})")
            chosen = int(idx[pos])
            remaining[chosen] = False
            A = linalg.outer_product_accumulate(A, Vt[:, chosen])
            level = cfg.record_trace
            if level is TraceLevel.FULL or (level is TraceLevel.SPECTRAL and j == n_iter - 1):
                trace.append(_record(j, chosen, u, qmin, A))
    finally:
        if pool is not None:
            pool.shutdown()
    s1 = tuple(int(i) for i in np.flatnonzero(~remaining))
    s2 = tuple(int(i) for i in np.flatnonzero(remaining))
    return PartitionResult(
        s1=s1,
        s2=s2,
        trace=tuple(trace),
        config=cfg,
        fingerprint=frame_fingerprint(f),
        iterations=n_iter,
    )


def run_barrier_greedy(f: Frame, cfg: SolverConfig | None = None) -> PartitionResult:
    """Greedy selection under the moving barrier u_j = 1/2 + j alpha/d."""
    cfg = replace(cfg, algorithm=Algorithm.BARRIER) if cfg else SolverConfig(algorithm=Algorithm.BARRIER)
    return _run(f, cfg, barrier=True)


def run_plain_greedy(f: Frame, cfg: SolverConfig | None = None) -> PartitionResult:
    """Greedy selection minimising v* (I - A_j)^{-1} v."""
    cfg = replace(cfg, algorithm=Algorithm.PLAIN) if cfg else SolverConfig(algorithm=Algorithm.PLAIN)
    return _run(f, cfg, barrier=False)


def solve(f: Frame, cfg: SolverConfig) -> PartitionResult:
    if cfg.algorithm is Algorithm.BARRIER:
        return run_barrier_greedy(f, cfg)
    return run_plain_greedy(f, cfg)
