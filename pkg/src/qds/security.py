"""Security quantities of the signature scheme derived from finite-size estimates.

Probability bounds are returned as base-2 logarithms. Use
:func:`qds.mathkernel.linear` to obtain a capped linear value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .errors import ConfigurationError, DomainError, InfeasibleError
from .mathkernel import (
    binary_entropy,
    inverse_binary_entropy,
    log2_binom_tail,
    log2_sum,
)


@dataclass(frozen=True)
class SecurityParams:
    """Confidence and smoothing parameters.

    ``alpha1`` defaults to ``eps_smooth / 10``; with ``alpha2 = alpha3 =
    alpha1`` this satisfies ``eps > 2 alpha1 + alpha2 + alpha3`` strictly.
    """

    eps_pe: float = 1e-5
    eps_smooth: float = 1e-10
    markov_a: float = 1e-5
    alpha1: float | None = None
    target_level: float = 1e-4
    pessimism_offset: float = 0.0

    def __post_init__(self):
        if self.alpha1 is None:
            object.__setattr__(self, "alpha1", self.eps_smooth / 10.0)
        for name in ("eps_pe", "eps_smooth", "markov_a", "alpha1", "target_level"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0 or (name != "target_level" and value == 1.0):
                raise ConfigurationError(f"{name} must lie in (0, 1), got {value!r}")
        if not self.eps_smooth > 4.0 * self.alpha1:
            raise ConfigurationError("need eps_smooth > 2*alpha1 + alpha2 + alpha3 (= 4*alpha1)")
        if self.pessimism_offset < 0:
            raise ConfigurationError("pessimism_offset must be non-negative")


@dataclass(frozen=True)
class AdversaryStrategy:
    kind: Literal["repudiating_alice", "guessing_forger"]
    e_b: float = 0.0
    e_c: float = 0.0
    forger_error_rate: float = 0.0

    def __post_init__(self):
        if self.kind not in ("repudiating_alice", "guessing_forger"):
            raise ConfigurationError(f"unknown adversary kind {self.kind!r}")
        for name in ("e_b", "e_c", "forger_error_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigurationError(f"{name} must be a probability")


def min_entropy(s_x0: float, s_x1: float, phi_u: float, pessimism_offset: float = 0.0) -> float:
    """Smooth min-entropy of the kept key: ``s0 + s1 (1 - h(phi))``, less an optional offset."""
    if s_x0 < 0 or s_x1 < 0:
        raise DomainError("count bounds must be non-negative")
    if not 0.0 <= phi_u <= 0.5:
        raise DomainError(f"phase error bound must lie in [0, 1/2], got {phi_u!r}")
    return s_x0 + s_x1 * (1.0 - binary_entropy(phi_u)) - pessimism_offset


def entropy_rate(c0: float, c1: float, phi_u: float) -> float:
    return c0 + c1 * (1.0 - binary_entropy(phi_u))


def solve_pe(c0: float, c1: float, phi_u: float, warnings: list[str] | None = None) -> float:
    """Minimum per-bit error rate a forger is forced to make."""
    budget = entropy_rate(c0, c1, phi_u)
    if budget >= 1.0:
        if budget > 1.0 and warnings is not None:
            warnings.append(f"entropy rate {budget:.6g} exceeds 1; p_E capped at 1/2")
        return 0.5
    return inverse_binary_entropy(max(budget, 0.0))


def feasible(c0: float, c1: float, phi_u: float, e_x_upper: float) -> bool:
    return entropy_rate(c0, c1, phi_u) - binary_entropy(e_x_upper) > 0.0


def choose_thresholds(e_x_upper: float, p_e: float) -> tuple[float, float]:
    """Split the gap between ``e_x_upper`` and ``p_e`` into equal thirds."""
    if not e_x_upper < p_e:
        raise InfeasibleError(f"no threshold gap: e_x_upper={e_x_upper!r} >= p_E={p_e!r}")
    gap = p_e - e_x_upper
    return e_x_upper + gap / 3.0, e_x_upper + 2.0 * gap / 3.0


def honest_abort_bound(eps_pe: float) -> float:
    return math.log2(2.0 * eps_pe)


def forging_log2_terms(h_min: float, L: int, s_v: float, params: SecurityParams) -> dict[str, float]:
    """The log2 of each additive piece of the forging bound."""
    if L <= 0 or L % 2:
        raise DomainError(f"L must be a positive even count, got {L!r}")
    if not 0.0 < s_v < 0.5:
        raise DomainError(f"s_v must lie in (0, 1/2), got {s_v!r}")
    n = L // 2
    r = math.floor(s_v * n)
    ball = log2_binom_tail(n, r)
    log2_a = math.log2(params.markov_a)
    return {
        "markov": log2_a,
        "guess": ball.log2_value - h_min - log2_a,
        "smoothing": math.log2(params.eps_smooth) - log2_a,
        "estimation": math.log2(8.0 * params.eps_pe),
        "ball_exact": float(ball.exact),
    }


def forging_bound(h_min: float, L: int, s_v: float, params: SecurityParams) -> float:
    """log2 of ``a + eps_F + 8 eps_PE`` with ``eps_F = (b(n, r) 2**-H + eps) / a``.

    ``n = L/2`` and ``r = floor(s_v n)``; the ball volume is exact for small
    ``n`` and the entropy approximation otherwise.
    """
    t = forging_log2_terms(h_min, L, s_v, params)
    return log2_sum(t["markov"], t["guess"], t["smoothing"], t["estimation"])


def repudiation_bound(s_a: float, s_v: float, L: int) -> float:
    """log2 of ``2 exp(-(s_v - s_a)**2 L / 4)``."""
    if not s_a < s_v:
        raise DomainError("repudiation bound needs s_a < s_v")
    if L < 1:
        raise DomainError("L must be positive")
    return 1.0 - 0.25 * (s_v - s_a) ** 2 * L / math.log(2.0)


def repudiation_strategy_bounds(strategy: AdversaryStrategy, s_a: float, s_v: float, L: int) -> float:
    """log2 bound on repudiation for a sender who fixes mismatch rates ``e_B``, ``e_C``.

    Repudiation needs Bob to accept *and* Charlie to reject, so each of the
    following applicable branches bounds it, and the smallest is returned:

    * ``e_C > s_a`` (or ``e_B > s_a``): Bob draws fewer than ``s_a L/2``
      mismatches from that string, at most ``exp(-(e - s_a)**2 L)``.
    * ``e_B, e_C <= s_a``: Charlie draws more than ``s_v L/2`` mismatches
      from either string, at most ``2 exp(-(s_v - s_a)**2 L)``.
    * otherwise, with both rates below ``s_v``: the same union bound with the
      actual rates, ``exp(-(s_v - e_B)**2 L) + exp(-(s_v - e_C)**2 L)``.
    """
    if strategy.kind != "repudiating_alice":
        raise ConfigurationError("repudiation bounds apply to a repudiating sender")
    if not s_a < s_v:
        raise DomainError("need s_a < s_v")
    e_b, e_c = strategy.e_b, strategy.e_c
    ln2 = math.log(2.0)
    candidates = [0.0]
    for e in (e_b, e_c):
        if e > s_a:
            candidates.append(-((e - s_a) ** 2) * L / ln2)
    if e_b <= s_a and e_c <= s_a:
        candidates.append(1.0 - (s_v - s_a) ** 2 * L / ln2)
    elif e_b < s_v and e_c < s_v:
        candidates.append(log2_sum(-((s_v - e_b) ** 2) * L / ln2, -((s_v - e_c) ** 2) * L / ln2))
    return min(candidates)


def qkd_key_length(n: float, c0: float, c1: float, phi_u: float, e_x_upper: float, f_ec: float) -> float:
    """Approximate extractable QKD key ``n (c0 + c1 (1 - h(phi)) - f_EC h(e_X))``."""
    if f_ec < 1.0:
        raise DomainError("f_ec must be at least 1")
    return n * (entropy_rate(c0, c1, phi_u) - f_ec * binary_entropy(e_x_upper))


__all__ = [
    "AdversaryStrategy",
    "SecurityParams",
    "choose_thresholds",
    "entropy_rate",
    "feasible",
    "forging_bound",
    "forging_log2_terms",
    "honest_abort_bound",
    "min_entropy",
    "qkd_key_length",
    "repudiation_bound",
    "repudiation_strategy_bounds",
    "solve_pe",
]
