"""Deterministic greedy algorithms for Weaver's two-way discrepancy problem."""

__version__ = "0.1.0"

from .frames import (  # noqa: E402
    Frame,
    GuaranteeRegime,
    direct_sum,
    harmonic_frame,
    random_phase_frame,
    rotate_frame,
    validate_frame,
)
from .solver import SolverConfig, run_barrier_greedy, run_plain_greedy, solve  # noqa: E402
from .diagnostics import condition_bound, guarantee_margin, spectral_report  # noqa: E402
from .oracle import brute_force_balanced, verify_selection_trace  # noqa: E402

__all__ = [
    "Frame",
    "GuaranteeRegime",
    "SolverConfig",
    "brute_force_balanced",
    "condition_bound",
    "direct_sum",
    "guarantee_margin",
    "harmonic_frame",
    "random_phase_frame",
    "rotate_frame",
    "run_barrier_greedy",
    "run_plain_greedy",
    "solve",
    "spectral_report",
    "validate_frame",
    "verify_selection_trace",
]
