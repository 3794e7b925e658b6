import itertools
from dataclasses import replace

import numpy as np
import pytest

from ksgreedy.errors import CapExceeded, SelectionMismatch, TraceMissing
from ksgreedy.frames import harmonic_frame, random_phase_frame, rotate_frame
from ksgreedy.oracle import balanced_count, brute_force_balanced, partition_value, verify_selection_trace
from ksgreedy.solver import SolverConfig, run_barrier_greedy, run_plain_greedy, solve


def slow_optimum(f):
    # reference: one eigvalsh call per subset, no batching
    best, arg = np.inf, None
    for s in itertools.combinations(range(f.m), f.m // 2):
        v = partition_value(f, s)
        if v < best - 1e-12:
            best, arg = v, s
    return best, arg


class TestBruteForce:
    def test_quarter_frame(self, quarter_frame):
        r = brute_force_balanced(quarter_frame)
        assert r.best_max_eigenvalue == pytest.approx(0.5, abs=1e-15)
        assert r.best_partition == (0, 1)
        assert r.evaluated_count == 6 and r.exhaustive
        assert r.theta == pytest.approx(0.5, abs=1e-15)

    def test_harmonic_2_8_matches_unbatched(self):
        f = harmonic_frame(2, 8)
        r = brute_force_balanced(f)
        best, arg = slow_optimum(f)
        assert r.evaluated_count == 70 == balanced_count(8)
        assert r.best_max_eigenvalue == pytest.approx(best, abs=1e-12)
        assert r.best_partition == arg

    def test_two_bases(self):
        # rows 0 and 2 of the 4-point DFT: vectors 0,1 and 2,3 repeat, so
        # {0,1} is a scaled orthonormal basis
        f = harmonic_frame(2, 4, rows=(0, 2))
        r = brute_force_balanced(f)
        assert r.evaluated_count == 6
        assert r.best_max_eigenvalue == pytest.approx(0.5, abs=1e-12)
        assert r.best_partition == (0, 1)

    def test_rotated_matches_unbatched(self):
        f = rotate_frame(harmonic_frame(3, 10), 6)
        r = brute_force_balanced(f)
        best, arg = slow_optimum(f)
        assert r.best_max_eigenvalue == pytest.approx(best, abs=1e-12)
        assert r.best_partition == arg

    def test_cap(self):
        with pytest.raises(CapExceeded) as info:
            brute_force_balanced(harmonic_frame(2, 30), cap=1000)
        assert info.value.count == balanced_count(30)

    def test_phase_invariant(self):
        f = rotate_frame(harmonic_frame(2, 12), 3)
        g = random_phase_frame(f, 11)
        a, b = brute_force_balanced(f), brute_force_balanced(g)
        assert a.best_max_eigenvalue == pytest.approx(b.best_max_eigenvalue, abs=1e-12)

    @pytest.mark.parametrize("d,m", [(2, 8), (2, 12), (1, 8), (1, 12), (1, 16)])
    def test_dominates_greedy(self, d, m):
        f = harmonic_frame(d, m)
        opt = brute_force_balanced(f).best_max_eigenvalue
        for run in (run_barrier_greedy, run_plain_greedy):
            res = run(f)
            assert opt <= partition_value(f, res.s1) + 1e-9


class TestReplay:
    @pytest.mark.parametrize("algorithm", ["barrier", "plain"])
    @pytest.mark.parametrize("frame", [harmonic_frame(2, 12), rotate_frame(harmonic_frame(3, 60), 2)])
    def test_passes(self, algorithm, frame):
        res = solve(frame, SolverConfig(algorithm=algorithm))
        assert verify_selection_trace(frame, res) == [True] * res.iterations

    def test_swapped_choices_rejected(self):
        f = rotate_frame(harmonic_frame(2, 40), 8)
        res = run_barrier_greedy(f)
        t = list(res.trace)
        t[4], t[5] = replace(t[4], chosen=t[5].chosen), replace(t[5], chosen=t[4].chosen)
        with pytest.raises(SelectionMismatch) as info:
            verify_selection_trace(f, replace(res, trace=tuple(t)))
        assert info.value.iteration in (4, 5)

    def test_later_index_on_tie_rejected(self):
        # all forms tie at j = 0; picking anything but the lowest index is wrong
        f = harmonic_frame(2, 8)
        res = run_plain_greedy(f)
        t = list(res.trace)
        t[0] = replace(t[0], chosen=7)
        with pytest.raises(SelectionMismatch):
            verify_selection_trace(f, replace(res, trace=tuple(t)))

    def test_needs_full_trace(self):
        f = harmonic_frame(2, 8)
        res = solve(f, SolverConfig(record_trace="spectral"))
        with pytest.raises(TraceMissing):
            verify_selection_trace(f, res)

    def test_size_guard(self):
        f = harmonic_frame(1, 514)
        with pytest.raises(ValueError):
            verify_selection_trace(f, run_plain_greedy(f))
