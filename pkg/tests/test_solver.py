import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ksgreedy import linalg
from ksgreedy.errors import BarrierBreach, InvalidFrame
from ksgreedy.frames import Frame, frame_fingerprint, harmonic_frame, random_phase_frame, rotate_frame
from ksgreedy.linalg import HermitianMatrix
from ksgreedy.solver import (
    Algorithm,
    SolverConfig,
    TraceLevel,
    pick_lowest,
    run_barrier_greedy,
    run_plain_greedy,
    select_next,
    solve,
)


def explicit_forms(f, A, u, candidates):
    # independent reference: dense inverse, no Cholesky
    inv = np.linalg.inv(u * np.eye(f.d) - A)
    return [float(np.vdot(f.vectors[i], inv @ f.vectors[i]).real) for i in candidates]


class TestSelectNext:
    def test_scalar_frame_all_tied(self):
        f = harmonic_frame(1, 4)
        delta = f.alpha / f.d
        M = HermitianMatrix([[0.5 + delta]])
        idx, q = select_next(range(4), M, f)
        assert idx == 0
        assert q == pytest.approx(f.alpha / (0.5 + delta), rel=1e-15)

    def test_identity_returns_lowest(self):
        f = rotate_frame(harmonic_frame(2, 10), 1)
        idx, q = select_next([7, 3, 5], HermitianMatrix.identity(2), f)
        assert idx == 3
        assert q == pytest.approx(f.alpha, rel=1e-12)

    def test_harmonic_first_plain_step(self):
        f = harmonic_frame(2, 8)
        forms = explicit_forms(f, np.zeros((2, 2)), 1.0, range(8))
        assert forms == pytest.approx([0.25] * 8, abs=1e-15)
        idx, q = select_next(range(8), HermitianMatrix.identity(2), f)
        assert (idx, q) == (0, pytest.approx(0.25, abs=1e-15))

    def test_picks_minimum(self, rng):
        f = rotate_frame(harmonic_frame(3, 40), 2)
        A = f.partial_sum([1, 5, 8, 13])
        M = HermitianMatrix(np.eye(3) - A)
        cands = [i for i in range(40) if i not in (1, 5, 8, 13)]
        forms = explicit_forms(f, A, 1.0, cands)
        idx, q = select_next(cands, M, f)
        assert idx == cands[int(np.argmin(forms))]
        assert q == pytest.approx(min(forms), rel=1e-12)

    def test_tie_break_tolerance(self):
        assert pick_lowest(np.array([0.3, 0.2 + 5e-13, 0.2])) == 1
        assert pick_lowest(np.array([0.3, 0.2 + 5e-12, 0.2])) == 2


class TestScalarInstance:
    @pytest.mark.parametrize("runner", [run_barrier_greedy, run_plain_greedy])
    def test_quarter_frame(self, runner, quarter_frame):
        res = runner(quarter_frame)
        assert res.s1 == (0, 1) and res.s2 == (2, 3)
        assert quarter_frame.partial_sum(res.s1)[0, 0].real == pytest.approx(0.5, abs=1e-15)
        assert quarter_frame.partial_sum(res.s2)[0, 0].real == pytest.approx(0.5, abs=1e-15)


class TestBarrierGreedy:
    def test_final_barrier_is_one(self, rotated_884):
        res = run_barrier_greedy(rotated_884)
        assert len(res.trace) == 442
        assert res.trace[-1].u_j == pytest.approx(1.0, abs=1e-12)
        assert res.trace[0].u_j == pytest.approx(0.5 + rotated_884.alpha / 2, abs=1e-15)

    def test_window_on_guaranteed_instance(self, rotated_884):
        res = run_barrier_greedy(rotated_884)
        w = np.linalg.eigvalsh(rotated_884.partial_sum(res.s1))
        assert w[-1] <= 0.75 + 1e-9 and w[0] >= 0.25 - 1e-9

    def test_trace_invariant(self, rotated_884):
        res = run_barrier_greedy(rotated_884)
        for r in res.trace:
            assert abs(r.trace_shift - 1.0) <= 2e-9

    def test_record_fields_against_dense_reference(self):
        f = rotate_frame(harmonic_frame(2, 40), 5)
        res = run_barrier_greedy(f)
        A = np.zeros((2, 2), dtype=complex)
        for r in res.trace:
            u = 0.5 + (r.j + 1) * f.alpha / f.d
            v = f.vectors[r.chosen]
            assert r.q_value == pytest.approx(float(np.vdot(v, np.linalg.solve(u * np.eye(2) - A, v)).real), rel=1e-10)
            A = A + np.outer(v, v.conj())
            shift = u * np.eye(2) - A
            w = np.linalg.eigvalsh(shift)
            assert r.potential == pytest.approx(-np.linalg.slogdet(shift)[1], abs=1e-12)
            assert r.gap_c == pytest.approx(w[0], abs=1e-12)
            assert r.kappa_shift == pytest.approx(w[-1] / w[0], rel=1e-10)

    def test_breach(self):
        with pytest.raises(BarrierBreach) as info:
            run_barrier_greedy(harmonic_frame(3, 4))
        assert info.value.iteration == 0

    def test_off_regime_small(self):
        f = harmonic_frame(2, 12)
        try:
            res = run_barrier_greedy(f)
        except BarrierBreach:
            return
        assert len(res.s1) == 6
        assert f.regime.value == "NoGuarantee"


class TestPlainGreedy:
    def test_barrier_fixed_at_one(self):
        res = run_plain_greedy(rotate_frame(harmonic_frame(3, 60), 1))
        assert all(r.u_j == 1.0 for r in res.trace)

    def test_logdet_floor(self):
        f = rotate_frame(harmonic_frame(3, 444), 3)
        res = run_plain_greedy(f)
        floor = -3 * math.log(2) - 2 * 9 / 444
        assert floor == pytest.approx(-2.1199, abs=1e-4)
        assert np.linalg.slogdet(np.eye(3) - f.partial_sum(res.s1))[1] >= floor

    def test_breach(self):
        with pytest.raises(BarrierBreach) as info:
            run_plain_greedy(harmonic_frame(3, 4))
        assert info.value.iteration == 1

    def test_config_echo(self):
        res = run_plain_greedy(harmonic_frame(1, 4), SolverConfig(algorithm="barrier"))
        assert res.config.algorithm is Algorithm.PLAIN


class TestOddAndConfig:
    def test_odd_rejected_by_default(self):
        with pytest.raises(InvalidFrame):
            run_barrier_greedy(harmonic_frame(1, 5))

    @pytest.mark.parametrize("algorithm", ["barrier", "plain"])
    def test_odd_larger_first(self, algorithm):
        f = rotate_frame(harmonic_frame(1, 7), 3)
        res = solve(f, SolverConfig(algorithm=algorithm, odd_m_policy="larger-first-set"))
        assert len(res.s1) == 4 and len(res.s2) == 3

    def test_invalid_frame(self):
        with pytest.raises(InvalidFrame):
            run_barrier_greedy(Frame.from_vectors([[1.0], [1.0], [1.0], [1.0]]))

    def test_trace_levels(self):
        f = rotate_frame(harmonic_frame(2, 30), 1)
        full = solve(f, SolverConfig(record_trace="full"))
        final = solve(f, SolverConfig(record_trace="spectral"))
        off = solve(f, SolverConfig(record_trace="off"))
        assert len(full.trace) == 15 and final.trace == (full.trace[-1],) and off.trace == ()
        assert full.s1 == final.s1 == off.s1

    def test_fingerprint(self):
        f = harmonic_frame(2, 8)
        assert run_plain_greedy(f).fingerprint == frame_fingerprint(f)

    def test_rejects_negative_parallelism(self):
        with pytest.raises(ValueError):
            SolverConfig(candidate_parallelism=-1)


@pytest.mark.parametrize("algorithm", ["barrier", "plain"])
@pytest.mark.parametrize("threads", [2, 3, 7])
def test_parallel_candidates_identical(algorithm, threads):
    f = rotate_frame(harmonic_frame(2, 200), 9)
    base = solve(f, SolverConfig(algorithm=algorithm, candidate_parallelism=1))
    par = solve(f, SolverConfig(algorithm=algorithm, candidate_parallelism=threads))
    assert par.s1 == base.s1
    assert par.trace == base.trace


@settings(max_examples=25, deadline=None)
@given(
    d=st.integers(1, 3),
    half=st.integers(2, 40),
    seed=st.integers(0, 2**31),
    algorithm=st.sampled_from(["barrier", "plain"]),
)
def test_partition_properties(d, half, seed, algorithm):
    m = max(2 * half, 2 * d + 2)
    f = rotate_frame(harmonic_frame(d, m), seed)
    try:
        res = solve(f, SolverConfig(algorithm=algorithm))
    except BarrierBreach:
        return
    chosen = [r.chosen for r in res.trace]
    assert len(set(chosen)) == len(chosen) == m // 2
    assert sorted(chosen) == list(res.s1)
    assert set(res.s1).isdisjoint(res.s2) and len(res.s1) + len(res.s2) == m
    if algorithm == "barrier":
        for r in res.trace:
            assert abs(r.trace_shift - d / 2) <= 1e-9 * d
            assert r.gap_c > 0


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), phase_seed=st.integers(0, 2**31), algorithm=st.sampled_from(["barrier", "plain"]))
def test_phase_invariance(seed, phase_seed, algorithm):
    f = rotate_frame(harmonic_frame(2, 60), seed)
    g = random_phase_frame(f, phase_seed)
    cfg = SolverConfig(algorithm=algorithm)
    assert solve(f, cfg).chosen_order == solve(g, cfg).chosen_order


def test_phase_invariance_with_ties():
    f = harmonic_frame(2, 40)
    g = random_phase_frame(f, 4)
    for alg in ("barrier", "plain"):
        cfg = SolverConfig(algorithm=alg)
        assert solve(f, cfg).chosen_order == solve(g, cfg).chosen_order


def test_first_step_always_ties():
    # every candidate has the same form at j = 0 on an equal-norm frame
    f = rotate_frame(harmonic_frame(2, 50), 3)
    forms = explicit_forms(f, np.zeros((2, 2)), 0.5 + f.alpha / 2, range(50))
    assert max(forms) - min(forms) <= 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), perm_seed=st.integers(0, 2**31), algorithm=st.sampled_from(["barrier", "plain"]))
def test_permutation_equivariance(seed, perm_seed, algorithm):
    # Exact equivariance is broken by the forced tie at j = 0, so check the
    # attainable part: mapped back, the permuted run is a greedy run on the
    # original frame, forced wherever the minimum is unique.
    f = rotate_frame(harmonic_frame(2, 50), seed)
    perm = np.random.default_rng(perm_seed).permutation(f.m)
    g = Frame(f.vectors[perm], f.alpha)
    res = solve(g, SolverConfig(algorithm=algorithm))
    order = [int(perm[k]) for k in res.chosen_order]
    A = np.zeros((2, 2), dtype=complex)
    remaining = list(range(f.m))
    for j, pick in enumerate(order):
        u = 0.5 + (j + 1) * f.alpha / f.d if algorithm == "barrier" else 1.0
        forms = np.array(explicit_forms(f, A, u, remaining))
        assert forms[remaining.index(pick)] <= forms.min() + 1e-10
        if np.sum(forms <= forms.min() + 1e-10) == 1:
            assert remaining[int(np.argmin(forms))] == pick
        remaining.remove(pick)
        A = A + np.outer(f.vectors[pick], f.vectors[pick].conj())
    assert sorted(order) == sorted(perm[list(res.s1)].tolist())
