"""Lossy channel and threshold-detector model for weak coherent pulses.

The detection probability for intensity ``u`` is ``1 - (1 - 2 p_d) exp(-u eta)``
and the bit error rate is the signal/dark-count mixture
``((1 - exp(-u eta)) Q + exp(-u eta) p_d) / R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

from .errors import ConfigurationError, DomainError

SiftingConvention = Literal["single_px", "squared_px"]
SIFTING_CONVENTIONS = ("single_px", "squared_px")


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ConfigurationError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class ChannelParams:
    distance_km: float = 50.0
    attenuation_db_per_km: float = 0.2
    receiver_loss_db: float = 2.8
    detector_efficiency: float = 0.204
    dark_count_prob: float = 2.1e-5
    optical_error_x: float = 0.0138
    optical_error_z: float = 0.0076
    pulse_rate_hz: float = 1e9

    def __post_init__(self):
        for name in ("distance_km", "attenuation_db_per_km", "receiver_loss_db"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be non-negative")
        for name in ("detector_efficiency", "dark_count_prob", "optical_error_x", "optical_error_z"):
            _check_prob(name, getattr(self, name))
        if self.pulse_rate_hz <= 0:
            raise ConfigurationError("pulse_rate_hz must be positive")


@dataclass(frozen=True)
class DecoySettings:
    """Three decoy intensities ``u1 > u2 > u3`` and the X-basis probability."""

    intensities: tuple[float, float, float] = (0.425, 0.0435, 0.0022)
    intensity_probs: tuple[float, float, float] = (0.25, 0.40, 0.35)
    basis_prob_x: float = 0.9375

    def __post_init__(self):
        object.__setattr__(self, "intensities", tuple(float(u) for u in self.intensities))
        object.__setattr__(self, "intensity_probs", tuple(float(p) for p in self.intensity_probs))
        if len(self.intensities) != 3 or len(self.intensity_probs) != 3:
            raise ConfigurationError("exactly three intensities and three probabilities are required")
        u1, u2, u3 = self.intensities
        if not (u1 > u2 > u3 >= 0):
            raise ConfigurationError(f"intensities must satisfy u1 > u2 > u3 >= 0, got {self.intensities}")
        if not u1 > u2 + u3:
            raise ConfigurationError("intensities must satisfy u1 > u2 + u3")
        if any(p <= 0 for p in self.intensity_probs):
            raise ConfigurationError("intensity probabilities must be positive")
        if abs(sum(self.intensity_probs) - 1.0) > 1e-12:
            raise ConfigurationError(f"intensity probabilities must sum to 1, got {sum(self.intensity_probs)!r}")
        if not 0.5 <= self.basis_prob_x < 1.0:
            raise ConfigurationError(f"basis_prob_x must lie in [1/2, 1), got {self.basis_prob_x!r}")

    @property
    def basis_prob_z(self) -> float:
        return 1.0 - self.basis_prob_x


@dataclass(frozen=True)
class ExpectedStatistics:
    """Mean-value detection statistics for one run of ``n_pulses`` pulses.

    Per-intensity tuples follow the order of ``DecoySettings.intensities``.
    """

    n_pulses: float
    detection_rate: tuple[float, ...]
    x_sifted: tuple[float, ...]
    z_sifted: tuple[float, ...]
    x_error_rate: tuple[float, ...]
    z_error_rate: tuple[float, ...]
    sifting_convention: str = "single_px"
    notes: tuple[str, ...] = field(default=())

    @property
    def expected_x_raw(self) -> float:
        return sum(self.x_sifted)

    @property
    def expected_z_raw(self) -> float:
        return sum(self.z_sifted)

    @property
    def z_errors(self) -> tuple[float, ...]:
        return tuple(n * e for n, e in zip(self.z_sifted, self.z_error_rate))

    @property
    def expected_observed_ex(self) -> float:
        total = self.expected_x_raw
        if total == 0:
            return 0.0
        return sum(n * e for n, e in zip(self.x_sifted, self.x_error_rate)) / total


def system_transmittance(params: ChannelParams) -> float:
    """Overall transmittance ``eta_det * 10**(-(alpha d + loss_rx) / 10)``."""
    loss_db = params.attenuation_db_per_km * params.distance_km + params.receiver_loss_db
    return params.detector_efficiency * 10.0 ** (-loss_db / 10.0)


def detection_rate(u: float, eta: float, p_d: float) -> float:
    if u < 0:
        raise DomainError(f"intensity must be non-negative, got {u!r}")
    return 1.0 - (1.0 - 2.0 * p_d) * math.exp(-u * eta)


def bit_error_rate(u: float, eta: float, p_d: float, q: float) -> float:
    """Error probability of a detected pulse; dark counts err half the time."""
    rate = detection_rate(u, eta, p_d)
    if rate <= 0.0:
        raise ZeroDivisionError("bit_error_rate undefined: detection rate is zero")
    attenuation = math.exp(-u * eta)
    return ((1.0 - attenuation) * q + attenuation * p_d) / rate


def expected_statistics(
    n_pulses: float,
    params: ChannelParams,
    decoy: DecoySettings,
    sifting_convention: SiftingConvention = "single_px",
) -> ExpectedStatistics:
    """Expected sifted counts and error rates for ``n_pulses`` transmitted pulses.

    ``single_px`` keeps a fraction ``p_X`` (resp. ``p_Z``) of detections per
    basis; ``squared_px`` applies the independent-basis-choice factor
    ``p_X**2``. The first one is what reproduces the published raw-key size,
    the second one is the physically sifted fraction.
    """
    if n_pulses < 0:
        raise DomainError("n_pulses must be non-negative")
    if sifting_convention not in SIFTING_CONVENTIONS:
        raise ConfigurationError(f"unknown sifting convention {sifting_convention!r}")
    eta = system_transmittance(params)
    p_x, p_z = decoy.basis_prob_x, decoy.basis_prob_z
    if sifting_convention == "squared_px":
        p_x, p_z = p_x * p_x, p_z * p_z
    rates, ex, ez, nx, nz = [], [], [], [], []
    for u, p_u in zip(decoy.intensities, decoy.intensity_probs):
        r = detection_rate(u, eta, params.dark_count_prob)
        rates.append(r)
        if r > 0:
            ex.append(bit_error_rate(u, eta, params.dark_count_prob, params.optical_error_x))
            ez.append(bit_error_rate(u, eta, params.dark_count_prob, params.optical_error_z))
        else:
            ex.append(0.0)
            ez.append(0.0)
        nx.append(n_pulses * p_u * r * p_x)
        nz.append(n_pulses * p_u * r * p_z)
    notes = ()
    if sifting_convention == "single_px":
        notes = ("single_px sifting: one factor of p_X per basis, not the p_X**2 of independent basis choices",)
    return ExpectedStatistics(
        n_pulses=n_pulses,
        detection_rate=tuple(rates),
        x_sifted=tuple(nx),
        z_sifted=tuple(nz),
        x_error_rate=tuple(ex),
        z_error_rate=tuple(ez),
        sifting_convention=sifting_convention,
        notes=notes,
    )
