"""Decoy-state finite-size bounds on the vacuum and single-photon contributions.

All count bounds are worst-case substitutions of Hoeffding intervals into the
asymptotic decoy formulas. Which end of each interval is used follows from the
sign of that count's coefficient:

=================  ==========  ==========  ==========
bound              n(u1)       n(u2)       n(u3)
=================  ==========  ==========  ==========
``s0_lower``       --          upper       lower
``s1_lower``       upper       lower       upper
``v1_upper``       --          upper       lower
=================  ==========  ==========  ==========

(``s1_lower`` additionally uses ``s0_lower``, whose coefficient is positive.)
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

from .channel import DecoySettings, ExpectedStatistics
from .errors import ConfigurationError, DomainError, EstimationError
from .mathkernel import gamma_correction, hoeffding_delta, serfling_delta

EstimationConvention = Literal["key_block", "full_sample"]
ESTIMATION_CONVENTIONS = ("key_block", "full_sample")

#: Concentration-bound failures charged to each estimated quantity. ``e_x`` is
#: charged twice because the worst case is taken over two independent key
#: generation runs (one per recipient). The total is the 8 eps_PE that enters
#: the forging bound.
FAILURE_BUDGET = {"e_x": 2, "s_x0": 2, "s_x1": 2, "phi_x1": 2}


@dataclass(frozen=True)
class CountStatistics:
    """Observed statistics of one key generation run.

    ``n_x`` holds the per-intensity X-basis counts inside the ``L + k``
    sample, ``n_z`` / ``m_z`` the Z-basis counts and Z-basis bit errors.
    ``x_sifted_total`` is the number of sifted X counts the sample was drawn
    from (defaults to ``L + k``).
    """

    n_x: tuple[float, float, float]
    n_z: tuple[float, float, float]
    m_z: tuple[float, float, float]
    observed_ex: float
    L: int
    k: int
    x_sifted_total: float | None = None

    def __post_init__(self):
        for name in ("n_x", "n_z", "m_z"):
            values = tuple(float(v) for v in getattr(self, name))
            if len(values) != 3 or any(v < 0 for v in values):
                raise DomainError(f"{name} must hold three non-negative counts")
            object.__setattr__(self, name, values)
        if any(m > n * (1 + 1e-12) for m, n in zip(self.m_z, self.n_z)):
            raise DomainError("Z-basis error counts cannot exceed Z-basis counts")
        if self.L <= 0 or self.L % 2:
            raise DomainError(f"L must be a positive even count, got {self.L!r}")
        if self.k < 1:
            raise DomainError("k must be at least 1")
        if not 0.0 <= self.observed_ex <= 1.0:
            raise DomainError("observed_ex must be a probability")
        if not math.isclose(sum(self.n_x), self.L + self.k, rel_tol=1e-9, abs_tol=1e-6):
            raise DomainError(f"X counts sum to {sum(self.n_x)!r}, expected L + k = {self.L + self.k}")
        if self.x_sifted_total is not None and self.x_sifted_total < self.L + self.k:
            raise DomainError("x_sifted_total cannot be smaller than L + k")

    @property
    def n(self) -> int:
        return self.L // 2

    @property
    def x_total(self) -> float:
        return float(self.L + self.k) if self.x_sifted_total is None else float(self.x_sifted_total)

    @classmethod
    def from_expected(cls, expected: ExpectedStatistics, L: int, k: int) -> "CountStatistics":
        """Mean-value statistics with the whole sifted X set forming the L + k sample."""
        total = expected.expected_x_raw
        if total <= 0:
            raise DomainError("no expected X-basis counts")
        scale = (L + k) / total
        return cls(
            n_x=tuple(c * scale for c in expected.x_sifted),
            n_z=expected.z_sifted,
            m_z=expected.z_errors,
            observed_ex=expected.expected_observed_ex,
            L=L,
            k=k,
            x_sifted_total=max(total, float(L + k)),
        )


@dataclass(frozen=True)
class FiniteSizeEstimates:
    s_x0_lower: float
    s_x1_lower: float
    s_z0_lower: float
    s_z1_lower: float
    phi_x1_upper: float
    v_z1_upper: float
    e_x_upper: float
    n: int
    tau: dict[int, float]
    failure_budget: int
    convention: str
    warnings: tuple[str, ...] = field(default=())

    @property
    def c0(self) -> float:
        return self.s_x0_lower / self.n

    @property
    def c1(self) -> float:
        return self.s_x1_lower / self.n


def tau(n_photons: int, decoy: DecoySettings) -> float:
    """Probability that a pulse carries ``n_photons`` photons, averaged over intensities."""
    if n_photons < 0:
        raise DomainError("photon number must be non-negative")
    log_fact = math.lgamma(n_photons + 1)
    total = 0.0
    for u, p_u in zip(decoy.intensities, decoy.intensity_probs):
        if u == 0.0:
            total += p_u if n_photons == 0 else 0.0
        else:
            total += p_u * math.exp(-u + n_photons * math.log(u) - log_fact)
    return total


def bound_observed_counts(obs: float, sample: float, eps_pe: float) -> tuple[float, float]:
    """Hoeffding interval ``obs -/+ delta(sample, eps_pe)``, lower end clamped at 0."""
    if obs < 0:
        raise DomainError("observed count must be non-negative")
    if obs > sample * (1 + 1e-12):
        raise DomainError(f"observed count {obs!r} exceeds sample size {sample!r}")
    delta = hoeffding_delta(sample, eps_pe)
    return max(obs - delta, 0.0), obs + delta


def _note(warnings: list[str] | None, message: str) -> None:
    if warnings is not None:
        warnings.append(message)


def _check_intensities(decoy: DecoySettings) -> tuple[float, float, float]:
    u1, u2, u3 = decoy.intensities
    if u2 == u3:
        raise ConfigurationError("decoy bounds need u2 != u3")
    return u1, u2, u3


def s0_lower(
    counts: Sequence[float],
    decoy: DecoySettings,
    eps_pe: float,
    sample: float | None = None,
    warnings: list[str] | None = None,
) -> float:
    """Lower bound on the vacuum contributions to ``counts``."""
    _, u2, u3 = _check_intensities(decoy)
    _, p2, p3 = decoy.intensity_probs
    sample = sum(counts) if sample is None else sample
    n3_lo, _ = bound_observed_counts(counts[2], sample, eps_pe)
    _, n2_hi = bound_observed_counts(counts[1], sample, eps_pe)
    value = tau(0, decoy) / (u2 - u3) * (u2 * math.exp(u3) * n3_lo / p3 - u3 * math.exp(u2) * n2_hi / p2)
    if value < 0:
        _note(warnings, f"s0 lower bound clamped from {value:.6g} to 0")
        value = 0.0
    return value


def s1_lower(
    counts: Sequence[float],
    decoy: DecoySettings,
    s_x0: float,
    eps_pe: float,
    sample: float | None = None,
    warnings: list[str] | None = None,
) -> float:
    """Lower bound on the single-photon contributions to ``counts``."""
    u1, u2, u3 = _check_intensities(decoy)
    p1, p2, p3 = decoy.intensity_probs
    denom = u1 * (u2 - u3) - (u2 * u2 - u3 * u3)
    if denom <= 0:
        raise ConfigurationError("single-photon bound needs u1 > u2 + u3")
    sample = sum(counts) if sample is None else sample
    _, n1_hi = bound_observed_counts(counts[0], sample, eps_pe)
    n2_lo, _ = bound_observed_counts(counts[1], sample, eps_pe)
    _, n3_hi = bound_observed_counts(counts[2], sample, eps_pe)
    t0, t1 = tau(0, decoy), tau(1, decoy)
    bracket = (
        math.exp(u2) * n2_lo / p2
        - math.exp(u3) * n3_hi / p3
        + (u2 * u2 - u3 * u3) / (u1 * u1) * (s_x0 / t0 - math.exp(u1) * n1_hi / p1)
    )
    value = u1 * t1 / denom * bracket
    if value < 0:
        _note(warnings, f"s1 lower bound clamped from {value:.6g} to 0")
        value = 0.0
    return value


def v1_upper(
    errors: Sequence[float],
    decoy: DecoySettings,
    eps_pe: float,
    sample: float | None = None,
    warnings: list[str] | None = None,
) -> float:
    """Upper bound on the single-photon bit errors among ``errors``."""
    _, u2, u3 = _check_intensities(decoy)
    _, p2, p3 = decoy.intensity_probs
    sample = sum(errors) if sample is None else sample
    _, m2_hi = bound_observed_counts(errors[1], sample, eps_pe)
    m3_lo, _ = bound_observed_counts(errors[2], sample, eps_pe)
    value = tau(1, decoy) / (u2 - u3) * (math.exp(u2) * m2_hi / p2 - math.exp(u3) * m3_lo / p3)
    if value < 0:
        _note(warnings, f"v1 upper bound clamped from {value:.6g} to 0")
        value = 0.0
    return value


def phase_error_upper(
    s_z1_lower: float,
    s_x1_lower: float,
    v_z1: float,
    alpha1: float,
    clamp_gamma: bool = False,
    warnings: list[str] | None = None,
) -> float:
    """Upper bound on the single-photon phase error rate of the X key.

    Raises :class:`EstimationError` when either single-photon lower bound is
    zero: there is then nothing to estimate from and the analysis must stop.
    """
    if s_z1_lower <= 0:
        raise EstimationError("Z-basis single-photon lower bound is zero; phase error cannot be bounded")
    if s_x1_lower <= 0:
        raise EstimationError("X-basis single-photon lower bound is zero; phase error cannot be bounded")
    ratio = v_z1 / s_z1_lower
    if ratio >= 0.5:
        _note(warnings, f"phase error ratio {ratio:.6g} >= 1/2, clamped to 1/2")
        return 0.5
    phi = ratio + gamma_correction(alpha1, ratio, s_z1_lower, s_x1_lower, clamp=clamp_gamma)
    if phi > 0.5:
        _note(warnings, f"phase error bound {phi:.6g} clamped to 1/2")
        phi = 0.5
    return phi


def error_rate_upper(observed_ex: float, n: float, k: float, eps_pe: float) -> float:
    """Serfling upper bound on the X error rate of the kept string, capped at 1/2."""
    value = observed_ex + serfling_delta(n, k, eps_pe)
    return min(value, 0.5)


def estimate(
    stats: CountStatistics,
    decoy: DecoySettings,
    eps_pe: float,
    alpha1: float,
    convention: EstimationConvention = "key_block",
    clamp_gamma: bool = False,
) -> FiniteSizeEstimates:
    """Run every finite-size estimate for one key generation run.

    ``key_block`` (default) performs the decoy analysis on the statistics of
    the ``n = L/2`` bits that form the kept key: the X counts are rescaled by
    ``n / (L + k)``, the Z counts and errors by ``n / x_total``, and each
    Hoeffding width uses the total of the rescaled counts it applies to.

    ``full_sample`` applies the decoy bounds to the whole ``L + k`` sample
    with Hoeffding widths ``delta(L + k)`` for X counts and
    ``delta(sum n_z)`` for both Z counts and Z errors, then rescales the
    X-basis bounds to the kept key.
    """
    if convention not in ESTIMATION_CONVENTIONS:
        raise ConfigurationError(f"unknown estimation convention {convention!r}")
    warnings: list[str] = []
    n, k = stats.n, stats.k
    if convention == "key_block":
        fx = n / (stats.L + k)
        fz = n / stats.x_total
        x_block = [c * fx for c in stats.n_x]
        z_block = [c * fz for c in stats.n_z]
        m_block = [c * fz for c in stats.m_z]
        sx0 = s0_lower(x_block, decoy, eps_pe, sample=n, warnings=warnings)
        sx1 = s1_lower(x_block, decoy, sx0, eps_pe, sample=n, warnings=warnings)
        sz0 = s0_lower(z_block, decoy, eps_pe, warnings=warnings)
        sz1 = s1_lower(z_block, decoy, sz0, eps_pe, warnings=warnings)
        v1 = v1_upper(m_block, decoy, eps_pe, warnings=warnings)
    else:
        sample = stats.L + k
        sx0 = s0_lower(stats.n_x, decoy, eps_pe, sample=sample, warnings=warnings)
        sx1 = s1_lower(stats.n_x, decoy, sx0, eps_pe, sample=sample, warnings=warnings)
        sx0, sx1 = sx0 * n / sample, sx1 * n / sample
        z_sample = sum(stats.n_z)
        sz0 = s0_lower(stats.n_z, decoy, eps_pe, sample=z_sample, warnings=warnings)
        sz1 = s1_lower(stats.n_z, decoy, sz0, eps_pe, sample=z_sample, warnings=warnings)
        v1 = v1_upper(stats.m_z, decoy, eps_pe, sample=z_sample, warnings=warnings)
    if sx0 + sx1 > n:
        warnings.append(f"s_x0 + s_x1 = {sx0 + sx1:.6g} exceeds n = {n}; s_x1 reduced")
        sx0 = min(sx0, n)
        sx1 = n - sx0
    phi = phase_error_upper(sz1, sx1, v1, alpha1, clamp_gamma=clamp_gamma, warnings=warnings)
    e_u = error_rate_upper(stats.observed_ex, n, k, eps_pe)
    if e_u == 0.5:
        warnings.append("X error rate bound clamped to 1/2")
    return FiniteSizeEstimates(
        s_x0_lower=sx0,
        s_x1_lower=sx1,
        s_z0_lower=sz0,
        s_z1_lower=sz1,
        phi_x1_upper=phi,
        v_z1_upper=v1,
        e_x_upper=e_u,
        n=n,
        tau={j: tau(j, decoy) for j in range(3)},
        failure_budget=sum(FAILURE_BUDGET.values()),
        convention=convention,
        warnings=tuple(warnings),
    )
