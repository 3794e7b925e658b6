"""Exhaustive references for small instances.

Nothing here shares code with the greedy solvers: partitions are scored with
numpy's batched ``eigvalsh`` and selections are replayed with explicit
determinants and explicit inverses.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapExceeded, SelectionMismatch, TraceMissing
from .frames import Frame
from .solver import TIE_TOL, U0, Algorithm, PartitionResult

DEFAULT_CAP = 2_000_000
REPLAY_MAX_M = 512
REPLAY_RTOL = 1e-9
_CHUNK = 16384


@dataclass(frozen=True)
class OracleResult:
    best_partition: tuple
    best_max_eigenvalue: float
    evaluated_count: int
    exhaustive: bool

    @property
    def theta(self):
        return 1.0 - self.best_max_eigenvalue


def balanced_count(m: int) -> int:
    return math.comb(m, m // 2)


def partition_value(f: Frame, subset) -> float:
    """max of lambda_max over the two sides S and its complement."""
    mask = np.zeros(f.m, dtype=bool)
    mask[list(subset)] = True
    w1 = np.linalg.eigvalsh(f.partial_sum(np.flatnonzero(mask)))[-1]
    w2 = np.linalg.eigvalsh(f.partial_sum(np.flatnonzero(~mask)))[-1]
    return float(max(w1, w2))


def brute_force_balanced(f: Frame, cap: int = DEFAULT_CAP) -> OracleResult:
    """Minimise the larger side's top eigenvalue over all balanced splits.

    Subsets of size floor(m/2) are visited in lexicographic order and the
    first one within 1e-12 of the optimum is returned.
    """
    m, d = f.m, f.d
    k = m // 2
    total = balanced_count(m)
    if total > cap:
        raise CapExceeded(total, cap)
    outer = np.einsum("mi,mj->mij", f.vectors, f.vectors.conj())
    full = outer.sum(axis=0)
    combos = itertools.combinations(range(m), k)
    best_val = math.inf
    best = None
    seen = 0
    while True:
        block = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, _CHUNK)), dtype=np.intp)
        if block.size == 0:
            break
        block = block.reshape(-1, k) if k else np.zeros((block.size, 0), dtype=np.intp)
        side1 = outer[block].sum(axis=1) if k else np.zeros((block.shape[0], d, d), dtype=np.complex128)
        side2 = full[None] - side1
        top1 = np.linalg.eigvalsh(side1)[:, -1]
        top2 = np.linalg.eigvalsh(side2)[:, -1]
        vals = np.maximum(top1, top2)
        pos = int(np.argmin(vals))
        if vals[pos] < best_val - 1e-12:
            # earliest entry of this block within tolerance of its minimum
            pos = int(np.argmax(vals <= vals[pos] + 1e-12))
            best_val = float(vals[pos])
            best = tuple(int(i) for i in block[pos])
        seen += block.shape[0]
    if k == 0:
        # m = 1: the single split puts everything on the second side
        best_val = float(np.linalg.eigvalsh(full)[-1])
        best = ()
        seen = 1
    return OracleResult(best, best_val, seen, True)


def _replay_values(f: Frame, algorithm: Algorithm, j: int, A: np.ndarray, idx: np.ndarray):
    d = f.d
    V = f.vectors[idx]
    if algorithm is Algorithm.BARRIER:
        u = U0 + (j + 1) * f.alpha / d
        M = u * np.eye(d) - A
        mats = M[None] - np.einsum("ni,nj->nij", V, V.conj())
        return np.real(np.linalg.det(mats))
    inv = np.linalg.inv(np.eye(d) - A)
    return np.real(np.einsum("ni,ij,nj->n", V.conj(), inv, V))


def verify_selection_trace(f: Frame, result: PartitionResult):
    """Replay every recorded choice with the literal selection rule.

    The barrier greedy is replayed by maximising det(u_{j+1} I - A_j - v v*)
    over all unpicked v; the plain greedy by minimising v* (I - A_j)^{-1} v
    with an explicit inverse.  Returns one boolean per iteration (all True);
    raises SelectionMismatch at the first disagreement.
    """
    if result.config.record_trace.value != "full" or len(result.trace) != result.iterations:
        raise TraceMissing("selection replay needs a full trace")
    if f.m > REPLAY_MAX_M:
        raise ValueError(f"replay limited to m <= {REPLAY_MAX_M}, got {f.m}")
    algorithm = result.config.algorithm
    maximise = algorithm is Algorithm.BARRIER
    remaining = np.ones(f.m, dtype=bool)
    A = np.zeros((f.d, f.d), dtype=np.complex128)
    verdicts = []
    for j, rec in enumerate(result.trace):
        idx = np.flatnonzero(remaining)
        got = rec.chosen
        if rec.j != j or not (0 <= got < f.m) or not remaining[got]:
            raise SelectionMismatch(j, None, got)
        vals = _replay_values(f, algorithm, j, A, idx)
        score = vals if maximise else -vals
        opt = float(score.max())
        scale = max(abs(opt), np.finfo(float).tiny)
        # ties mirror the solver: 1e-12 on the quadratic form, relative on det
        band = TIE_TOL * scale if maximise else TIE_TOL
        expected = int(idx[int(np.argmax(score >= opt - band))])
        mine = float(score[np.searchsorted(idx, got)])
        earlier_tie = np.any((idx < got) & (score >= mine - band))
        if mine < opt - REPLAY_RTOL * scale or earlier_tie:
            raise SelectionMismatch(j, expected, got)
        verdicts.append(True)
        v = f.vectors[got]
        A = A + np.outer(v, v.conj())
        remaining[got] = False
    return verdicts
