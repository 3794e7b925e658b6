"""Spectral checks of a computed partition against the proven guarantees."""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import linalg
from .errors import DegenerateBound, IndexOutOfRange, NotPositiveDefinite, SpectralIdentityError
from .frames import Frame, GuaranteeRegime
from .solver import U0, Algorithm, PartitionResult

VERDICT_TOL = 1e-9
SIDE_IDENTITY_TOL = 1e-6
RADICAND_CLAMP = 1e-12
# spread of A / mean - I below which the AM-GM ratio uses the eigen route
NEAR_IDENTITY = 0.5

WINDOW_UPPER = 3 / 4
WINDOW_LOWER = 1 / 4
TIGHT_UPPER = 2 / 3
TIGHT_LOWER = 1 / 3
X_WAYPOINT = 1 / 5
KAPPA_WAYPOINT = 3 / 2


class Guarantee(str, enum.Enum):
    PASS34 = "Pass34"
    FAIL = "Fail"
    NOT_APPLICABLE = "NotApplicable"


def _log_amgm_ratio(A: linalg.HermitianMatrix, tr: float) -> float:
    """log of (d / tr A)^d det A, which is <= 0 by AM-GM."""
    d = A.dim
    logdet = linalg.log_det(A)
    dev = A.data * (d / tr) - np.eye(d)
    b = linalg.hermitian_eigenvalues(linalg.HermitianMatrix._trusted(dev))
    if np.max(np.abs(b)) > NEAR_IDENTITY:
        return d * math.log(d / tr) + logdet
    # b sums to zero, so the log is sum(log1p(b) - b); this keeps the
    # second-order size of the result instead of cancelling it away
    return float(np.sum(np.log1p(b) - b))


def condition_bound(A: linalg.HermitianMatrix):
    """Upper bound on kappa(A) from det, trace and dimension alone.

    x = sqrt(1 - (d / tr A)^d det A) and kappa(A) <= (1 + x) / (1 - x).
    Returns ``(x, kappa_upper)``.  The AM-GM ratio is formed in log space.
    """
    tr = A.trace()
    if not tr > 0:
        raise NotPositiveDefinite("trace is not positive")
    s = _log_amgm_ratio(A, tr)
    radicand = -math.expm1(s)
    if radicand < 0.0:
        if radicand < -RADICAND_CLAMP:
            raise DegenerateBound(f"negative radicand {radicand:.3e}: det exceeds the AM-GM bound")
        radicand = 0.0
    x = math.sqrt(radicand)
    ratio = math.exp(s)
    if ratio <= 0.0:
        return x, math.inf
    # (1+x)/(1-x) = (1+x)^2 / (1-x^2), avoiding the cancellation in 1-x
    return x, (1.0 + x) ** 2 / ratio


def logdet_floor(d: int, m: int) -> float:
    """Lower bound -d log 2 - 2 d^2 / m on log det(I - A) for the plain greedy."""
    return -d * math.log(2.0) - 2.0 * d * d / m


def regime_covers(regime: GuaranteeRegime, algorithm: Algorithm) -> bool:
    regime = GuaranteeRegime(regime)
    if algorithm is Algorithm.BARRIER:
        return regime is GuaranteeRegime.ALG1
    return regime in (GuaranteeRegime.ALG1, GuaranteeRegime.ALG2)


@dataclass(frozen=True)
class SpectralReport:
    lambda_min_A: float
    lambda_max_A: float
    lambda_min_IA: float
    lambda_max_IA: float
    theta: float
    kappa_IA: float
    x_bound: float
    kappa_upper: float
    logdet_IA: float
    logdet_floor: float
    guarantee: Guarantee

    @property
    def worst_side(self):
        return max(self.lambda_max_A, self.lambda_max_IA)

    def to_dict(self):
        # non-finite values (singular I - A) are written as null
        out = {k: (v if math.isfinite(v) else None) for k, v in asdict(self).items() if k != "guarantee"}
        out["guarantee"] = self.guarantee.value
        return out

    @classmethod
    def from_dict(cls, doc):
        vals = {}
        for k, v in doc.items():
            if k == "guarantee":
                continue
            if v is None:
                v = -math.inf if k == "logdet_IA" else math.inf
            vals[k] = float(v)
        return cls(guarantee=Guarantee(doc["guarantee"]), **vals)


def _check_indices(f: Frame, result: PartitionResult):
    s1, s2 = list(result.s1), list(result.s2)
    for i in s1 + s2:
        if not 0 <= i < f.m:
            raise IndexOutOfRange(f"index {i} outside [0, {f.m})")
    if len(set(s1) | set(s2)) != len(s1) + len(s2):
        raise IndexOutOfRange("s1 and s2 overlap or repeat indices")
    return s1, s2


def spectral_report(f: Frame, result: PartitionResult, regime: GuaranteeRegime | None = None) -> SpectralReport:
    """Eigen-extremes of both sides of the partition and the derived bounds.

    The verdict is Pass34 when both sides stay below 3/4 (+1e-9) and Fail
    otherwise.  When ``regime`` is given and does not cover the algorithm
    that produced ``result``, a missed window is reported as NotApplicable.
    """
    s1, s2 = _check_indices(f, result)
    d = f.d
    A = linalg.HermitianMatrix(f.partial_sum(s1))
    lam = linalg.hermitian_eigenvalues(A)
    # Parseval: the second side is I - A, so its spectrum is 1 - lam reversed
    lam_side2 = (1.0 - lam)[::-1]
    if s2:
        direct = np.linalg.eigvalsh(f.partial_sum(s2))
        err = max(abs(direct[-1] - lam_side2[0]), abs(direct[0] - lam_side2[-1]))
        if err > SIDE_IDENTITY_TOL:
            raise SpectralIdentityError(f"second side disagrees with I - A by {err:.3e}")
    lmax_A, lmin_A = float(lam[0]), float(lam[-1])
    lmax_IA, lmin_IA = float(lam_side2[0]), float(lam_side2[-1])
    worst = max(lmax_A, lmax_IA)
    IA = linalg.shifted(A, 1.0)
    try:
        logdet = linalg.log_det(IA)
    except NotPositiveDefinite:
        logdet = -math.inf
    if lmin_IA > 0 and math.isfinite(logdet):
        kappa = lmax_IA / lmin_IA
        try:
            x, kup = condition_bound(IA)
        except (NotPositiveDefinite, DegenerateBound):
            x, kup = 1.0, math.inf
    else:
        kappa, x, kup = math.inf, 1.0, math.inf
    if worst <= WINDOW_UPPER + VERDICT_TOL:
        verdict = Guarantee.PASS34
    elif regime is not None and not regime_covers(regime, result.config.algorithm):
        verdict = Guarantee.NOT_APPLICABLE
    else:
        verdict = Guarantee.FAIL
    return SpectralReport(
        lambda_min_A=lmin_A,
        lambda_max_A=lmax_A,
        lambda_min_IA=lmin_IA,
        lambda_max_IA=lmax_IA,
        theta=1.0 - worst,
        kappa_IA=kappa,
        x_bound=x,
        kappa_upper=kup,
        logdet_IA=logdet,
        logdet_floor=logdet_floor(d, f.m),
        guarantee=verdict,
    )


class MarginStatus(str, enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    NOT_APPLICABLE = "NotApplicable"


@dataclass(frozen=True)
class Margin:
    name: str
    value: float
    threshold: float
    slack: float
    status: MarginStatus

    def to_dict(self):
        out = asdict(self)
        out["status"] = self.status.value
        return out


@dataclass(frozen=True)
class MarginSummary:
    margins: tuple

    def __getitem__(self, name):
        for mg in self.margins:
            if mg.name == name:
                return mg
        raise KeyError(name)

    def to_dict(self):
        return {mg.name: mg.to_dict() for mg in self.margins}


def guarantee_margin(
    report: SpectralReport,
    regime: GuaranteeRegime,
    algorithm: Algorithm | str | None = None,
    m: int | None = None,
    d: int | None = None,
) -> MarginSummary:
    """Slack in each inequality of the guarantee chain.

    Slack is positive when the inequality holds.  A margin is NotApplicable
    outside the regime of ``algorithm`` (any guaranteed regime when no
    algorithm is given).  lambda_min(A) >= 1/3 has no proof behind it and is
    always reported as NotApplicable, for reference.
    """
    regime = GuaranteeRegime(regime)
    if algorithm is None:
        covered = regime is not GuaranteeRegime.NONE
        plain = covered
    else:
        algorithm = Algorithm(algorithm)
        covered = regime_covers(regime, algorithm)
        plain = algorithm is Algorithm.PLAIN
    floor_applies = plain and (m is None or d is None or m > 2 * d)

    def upper(name, value, threshold, applies):
        return _margin(name, value, threshold, threshold - value, applies)

    def lower(name, value, threshold, applies):
        return _margin(name, value, threshold, value - threshold, applies)

    margins = (
        upper("x_vs_one_fifth", report.x_bound, X_WAYPOINT, covered),
        upper("kappa_IA_vs_three_halves", report.kappa_IA, KAPPA_WAYPOINT, covered),
        upper("lambda_max_A_vs_three_quarters", report.lambda_max_A, WINDOW_UPPER, covered),
        upper("lambda_max_A_vs_two_thirds", report.lambda_max_A, TIGHT_UPPER, covered),
        lower("lambda_min_A_vs_one_quarter", report.lambda_min_A, WINDOW_LOWER, covered),
        lower("lambda_min_A_vs_one_third", report.lambda_min_A, TIGHT_LOWER, False),
        lower("logdet_IA_vs_floor", report.logdet_IA, report.logdet_floor, floor_applies),
    )
    return MarginSummary(margins)


def _margin(name, value, threshold, slack, applies):
    if not applies:
        status = MarginStatus.NOT_APPLICABLE
    elif slack >= -VERDICT_TOL:
        status = MarginStatus.PASS
    else:
        status = MarginStatus.FAIL
    return Margin(name, float(value), float(threshold), float(slack), status)


# ---------------------------------------------------------------------------
# per-iteration trace checks


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    applicable: bool
    worst: float | None
    detail: str = ""

    def to_dict(self):
        return asdict(self)


def check_trace_invariant(f: Frame, result: PartitionResult) -> CheckResult:
    """tr(u_j I - A_j) stays at d/2 throughout the barrier greedy."""
    name = "trace_invariant"
    if result.config.algorithm is not Algorithm.BARRIER or not result.trace:
        return CheckResult(name, True, False, None, "barrier runs with a trace only")
    target = f.d * U0
    worst = max(abs(r.trace_shift - target) for r in result.trace)
    return CheckResult(name, worst <= 1e-9 * f.d, True, worst, f"max |tr - d/2| = {worst:.3e}")


def check_gap_invariants(f: Frame, result: PartitionResult) -> CheckResult:
    """c_j >= 1/3 and kappa(u_j I - A_j) <= 3/2 at every barrier iteration."""
    name = "gap_and_condition"
    if result.config.algorithm is not Algorithm.BARRIER or not result.trace:
        return CheckResult(name, True, False, None, "barrier runs with a trace only")
    min_gap = min(r.gap_c for r in result.trace)
    max_kappa = max(r.kappa_shift for r in result.trace)
    ok = min_gap >= TIGHT_LOWER - 1e-9 and max_kappa <= KAPPA_WAYPOINT + 1e-9
    applies = f.regime is GuaranteeRegime.ALG1
    return CheckResult(
        name,
        ok or not applies,
        applies,
        min_gap,
        f"min gap {min_gap:.6f}, max kappa {max_kappa:.6f}",
    )


def check_potential_increase(f: Frame, result: PartitionResult) -> CheckResult:
    """Phi^{u_{j+1}}(A_{j+1}) - Phi^{u_j}(A_j) <= 2 alpha^2 / c_j^2 per step."""
    name = "potential_increase"
    cfg = result.config
    if cfg.algorithm is not Algorithm.BARRIER or len(result.trace) != result.iterations:
        return CheckResult(name, True, False, None, "barrier runs with a full trace only")
    alpha = f.alpha
    prev_phi = f.d * math.log(2.0)  # -log det(I/2)
    prev_gap = U0
    worst = -math.inf
    for r in result.trace:
        excess = (r.potential - prev_phi) - 2.0 * alpha * alpha / prev_gap**2
        worst = max(worst, excess)
        prev_phi, prev_gap = r.potential, r.gap_c
    applies = f.regime is GuaranteeRegime.ALG1
    ok = worst <= 1e-9
    return CheckResult(name, ok or not applies, applies, worst, f"max excess over bound {worst:.3e}")


def _replay_shifts(f: Frame, result: PartitionResult):
    """Yield (j, remaining indices, A_j) for each recorded iteration."""
    remaining = np.ones(f.m, dtype=bool)
    A = np.zeros((f.d, f.d), dtype=np.complex128)
    for r in result.trace:
        yield r, np.flatnonzero(remaining), A
        v = f.vectors[r.chosen]
        A = A + np.outer(v, v.conj())
        remaining[r.chosen] = False


def check_average_form(f: Frame, result: PartitionResult) -> CheckResult:
    """Sum of v*(I - A_j)^{-1} v over unpicked v equals d; chosen <= d/(m-j)."""
    name = "average_quadratic_form"
    if result.config.algorithm is not Algorithm.PLAIN or len(result.trace) != result.iterations:
        return CheckResult(name, True, False, None, "plain runs with a full trace only")
    d = f.d
    worst_sum = 0.0
    worst_pick = -math.inf
    for r, idx, A in _replay_shifts(f, result):
        V = f.vectors[idx].T
        X = np.linalg.solve(np.eye(d) - A, V)
        forms = np.real(np.sum(V.conj() * X, axis=0))
        worst_sum = max(worst_sum, abs(float(forms.sum()) - d))
        worst_pick = max(worst_pick, r.q_value - d / (f.m - r.j))
    ok = worst_sum <= 1e-6 and worst_pick <= 1e-9
    return CheckResult(name, ok, True, worst_sum, f"max |sum - d| = {worst_sum:.3e}, max pick excess {worst_pick:.3e}")


def check_determinant_accounting(f: Frame, result: PartitionResult) -> CheckResult:
    """log det(I - A_{j+1}) = log det(I - A_j) + log(1 - q_j) stepwise."""
    name = "determinant_accounting"
    if result.config.algorithm is not Algorithm.PLAIN or len(result.trace) != result.iterations:
        return CheckResult(name, True, False, None, "plain runs with a full trace only")
    prev = 0.0
    worst = 0.0
    for r in result.trace:
        logdet = -r.potential
        worst = max(worst, abs(logdet - (prev + math.log1p(-r.q_value))))
        prev = logdet
    return CheckResult(name, worst <= 1e-8, True, worst, f"max drift {worst:.3e}")


def check_logdet_floor(f: Frame, result: PartitionResult, report: SpectralReport) -> CheckResult:
    name = "logdet_floor"
    applies = result.config.algorithm is Algorithm.PLAIN and f.m > 2 * f.d
    slack = report.logdet_IA - report.logdet_floor
    ok = slack >= -1e-6
    return CheckResult(name, ok or not applies, applies, slack, f"log det(I-A) - floor = {slack:.6g}")


def check_condition_bound(report: SpectralReport) -> CheckResult:
    name = "condition_bound"
    if not math.isfinite(report.kappa_IA):
        return CheckResult(name, True, False, None, "I - A is singular")
    gap = report.kappa_upper - report.kappa_IA
    return CheckResult(name, gap >= -1e-8, True, gap, f"kappa bound slack {gap:.3e}")


def trace_checks(f: Frame, result: PartitionResult, report: SpectralReport):
    return [
        check_condition_bound(report),
        check_logdet_floor(f, result, report),
        check_trace_invariant(f, result),
        check_gap_invariants(f, result),
        check_potential_increase(f, result),
        check_average_form(f, result),
        check_determinant_accounting(f, result),
    ]
