"""End-to-end security analysis: channel model -> finite-size estimates -> bounds.

The analysis runs on mean-value (expected) statistics. The sample split
follows a fixed ratio: the sifted X data is divided into the kept key
(``n = L/2``), the forwarded key (``L/2``) and ``k = k_ratio * n`` bits for
error estimation.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .channel import SIFTING_CONVENTIONS, ChannelParams, DecoySettings, expected_statistics
from .errors import ConfigurationError, EstimationError, InfeasibleError
from .estimation import ESTIMATION_CONVENTIONS, CountStatistics, estimate
from .mathkernel import binary_entropy, inverse_binary_entropy, linear
from .security import (
    SecurityParams,
    choose_thresholds,
    forging_bound,
    honest_abort_bound,
    min_entropy,
    qkd_key_length,
    repudiation_bound,
)

#: Relative slack when comparing a bound against the target level. The
#: forging bound has a floor of ``a + eps/a + 8 eps_PE`` that can equal the
#: target exactly, and the float sum of those terms may land one ulp above it.
TARGET_RTOL = 1e-9


@dataclass(frozen=True)
class AnalysisOptions:
    sifting_convention: str = "single_px"
    estimation_convention: str = "key_block"
    f_ec: float = 1.2
    k_ratio: float = 0.1
    clamp_gamma: bool = False

    def __post_init__(self):
        if self.sifting_convention not in SIFTING_CONVENTIONS:
            raise ConfigurationError(f"unknown sifting convention {self.sifting_convention!r}")
        if self.estimation_convention not in ESTIMATION_CONVENTIONS:
            raise ConfigurationError(f"unknown estimation convention {self.estimation_convention!r}")
        if not 1.0 <= self.f_ec <= 2.0:
            raise ConfigurationError(f"f_ec must lie in [1, 2], got {self.f_ec!r}")
        if not 0.0 < self.k_ratio <= 1.0:
            raise ConfigurationError(f"k_ratio must lie in (0, 1], got {self.k_ratio!r}")


@dataclass(frozen=True)
class SecurityReport:
    n_pulses: float
    L: int
    k: int
    expected_x_raw: float
    observed_ex: float
    e_x_upper: float
    s_x0_lower: float
    s_x1_lower: float
    phi_x1_upper: float
    h_min: float
    p_e: float
    feasible: bool
    s_a: float | None
    s_v: float | None
    p_abort_log2: float
    p_forge_log2: float | None
    p_repud_log2: float | None
    qkd_key_length: float
    status: str = "ok"
    warnings: tuple[str, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.L // 2

    @property
    def p_abort(self) -> float:
        return linear(self.p_abort_log2)

    @property
    def p_forge(self) -> float | None:
        return None if self.p_forge_log2 is None else linear(self.p_forge_log2)

    @property
    def p_repud(self) -> float | None:
        return None if self.p_repud_log2 is None else linear(self.p_repud_log2)

    def meets(self, target: float) -> bool:
        """True when the scheme is feasible and all three bounds are at most ``target``."""
        if not self.feasible:
            return False
        limit = math.log2(target) + TARGET_RTOL / math.log(2.0)
        return all(v <= limit for v in (self.p_abort_log2, self.p_forge_log2, self.p_repud_log2))

    def as_dict(self) -> dict:
        out = asdict(self)
        out["warnings"] = list(self.warnings)
        out["n"] = self.n
        out["p_abort"] = self.p_abort
        out["p_forge"] = self.p_forge
        out["p_repud"] = self.p_repud
        return out


def split_sample(x_raw: float, k_ratio: float = 0.1) -> tuple[int, int]:
    """Largest ``(L, k)`` with ``L = 2n``, ``k = floor(k_ratio n)`` and ``L + k <= x_raw``."""
    n = int(math.floor(x_raw / (2.0 + k_ratio)))
    k = int(math.floor(k_ratio * n))
    return 2 * n, k


def _failed_report(n_pulses, L, k, x_raw, observed_ex, eps_pe, status, warnings=()) -> SecurityReport:
    return SecurityReport(
        n_pulses=n_pulses,
        L=L,
        k=k,
        expected_x_raw=x_raw,
        observed_ex=observed_ex,
        e_x_upper=math.nan,
        s_x0_lower=0.0,
        s_x1_lower=0.0,
        phi_x1_upper=0.5,
        h_min=0.0,
        p_e=0.0,
        feasible=False,
        s_a=None,
        s_v=None,
        p_abort_log2=honest_abort_bound(eps_pe),
        p_forge_log2=None,
        p_repud_log2=None,
        qkd_key_length=0.0,
        status=status,
        warnings=tuple(warnings),
    )


def analyze(
    channel: ChannelParams,
    decoy: DecoySettings,
    params: SecurityParams,
    n_pulses: float,
    options: AnalysisOptions = AnalysisOptions(),
    strict: bool = True,
) -> SecurityReport:
    """Security report for ``n_pulses`` transmitted pulses per key generation run.

    With ``strict=True`` estimation failures raise :class:`EstimationError`;
    otherwise they are returned as an infeasible report whose ``status``
    carries the diagnostic.
    """
    expected = expected_statistics(n_pulses, channel, decoy, options.sifting_convention)
    x_raw = expected.expected_x_raw
    observed_ex = expected.expected_observed_ex
    L, k = split_sample(x_raw, options.k_ratio)
    warnings = list(expected.notes)
    if L < 2 or k < 1:
        if strict:
            raise EstimationError(f"too few expected X counts ({x_raw:.3g}) for any signature")
        return _failed_report(n_pulses, L, k, x_raw, observed_ex, params.eps_pe, "insufficient_counts", warnings)
    stats = CountStatistics.from_expected(expected, L, k)
    try:
        est = estimate(
            stats,
            decoy,
            params.eps_pe,
            params.alpha1,
            convention=options.estimation_convention,
            clamp_gamma=options.clamp_gamma,
        )
    except EstimationError as exc:
        if strict:
            raise
        return _failed_report(n_pulses, L, k, x_raw, observed_ex, params.eps_pe, f"estimation_failed: {exc}", warnings)
    warnings.extend(est.warnings)
    n = est.n
    h_min = min_entropy(est.s_x0_lower, est.s_x1_lower, est.phi_x1_upper, params.pessimism_offset)
    rate = h_min / n
    if rate >= 1.0:
        p_e = 0.5
        if rate > 1.0:
            warnings.append(f"entropy rate {rate:.6g} exceeds 1; p_E capped at 1/2")
    else:
        p_e = inverse_binary_entropy(max(rate, 0.0))
    is_feasible = rate - binary_entropy(est.e_x_upper) > 0.0 and p_e > est.e_x_upper
    qkd = qkd_key_length(
        n,
        (est.s_x0_lower - params.pessimism_offset) / n,
        est.c1,
        est.phi_x1_upper,
        est.e_x_upper,
        options.f_ec,
    )
    s_a = s_v = forge = repud = None
    if is_feasible:
        s_a, s_v = choose_thresholds(est.e_x_upper, p_e)
        forge = forging_bound(h_min, L, s_v, params)
        repud = repudiation_bound(s_a, s_v, L)
    return SecurityReport(
        n_pulses=n_pulses,
        L=L,
        k=k,
        expected_x_raw=x_raw,
        observed_ex=observed_ex,
        e_x_upper=est.e_x_upper,
        s_x0_lower=est.s_x0_lower,
        s_x1_lower=est.s_x1_lower,
        phi_x1_upper=est.phi_x1_upper,
        h_min=h_min,
        p_e=p_e,
        feasible=is_feasible,
        s_a=s_a,
        s_v=s_v,
        p_abort_log2=honest_abort_bound(params.eps_pe),
        p_forge_log2=forge,
        p_repud_log2=repud,
        qkd_key_length=qkd,
        status="ok" if is_feasible else "infeasible",
        warnings=tuple(warnings),
    )


def required_signature_length(
    channel: ChannelParams,
    decoy: DecoySettings,
    params: SecurityParams,
    options: AnalysisOptions = AnalysisOptions(),
    n_min: float = 1e5,
    n_max: float = 1e14,
    grid_factor: float = 2.0**0.25,
    rel_tol: float = 1e-4,
) -> tuple[int, int, SecurityReport]:
    """Smallest number of pulses for which every bound is below ``params.target_level``.

    Scans a geometric grid of pulse counts from ``n_min`` and then bisects
    between the last failing and first passing grid points. Returns
    ``(L, n_pulses, report)``.
    """
    target = params.target_level

    def run(n_pulses: float) -> SecurityReport:
        return analyze(channel, decoy, params, n_pulses, options, strict=False)

    if not run(n_max).feasible:
        raise InfeasibleError("channel does not support the scheme even with very many pulses")
    previous = None
    n_pulses = float(n_min)
    while n_pulses <= n_max * grid_factor:
        report = run(n_pulses)
        if report.meets(target):
            break
        previous = n_pulses
        n_pulses *= grid_factor
    else:
        raise InfeasibleError(f"target level {target:g} not reached below {n_max:g} pulses")
    if previous is None:
        return report.L, int(math.ceil(n_pulses)), report
    lo, hi = previous, n_pulses
    while hi / lo - 1.0 > rel_tol:
        mid = math.sqrt(lo * hi)
        candidate = run(mid)
        if candidate.meets(target):
            hi, report = mid, candidate
        else:
            lo = mid
    n_final = int(math.ceil(hi))
    report = run(n_final)
    return report.L, n_final, report
