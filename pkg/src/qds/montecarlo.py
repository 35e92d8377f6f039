"""Seeded Monte Carlo scenarios for the signature protocol.

Random streams
--------------
Trial ``t`` draws party ``p``'s randomness from
``SeedSequence(master_seed, spawn_key=(t, p))``, with ``p`` taken from
:data:`STREAMS`. A trial therefore depends only on the master seed and its own
index, never on which worker ran it or in what order.

Aggregation
-----------
Trials are grouped into fixed chunks, each chunk is reduced to a
:class:`Tally`, and tallies are merged in chunk order. Merging is exact
integer addition, so the result does not depend on the number of workers.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.stats import norm

from .channel import ChannelParams, DecoySettings
from .errors import ConfigurationError, DomainError
from .kgp import run_kgp
from .protocol import Declaration, KeyString, PartyId, symmetrise, verify
from .security import AdversaryStrategy

STREAMS = {
    "alice": 0,
    "bob": 1,
    "charlie": 2,
    "kgp_bob": 3,
    "kgp_charlie": 4,
}

#: Trials per work unit. Fixed so chunk boundaries never depend on workers.
CHUNK_SIZE = 1000


def trial_rng(master_seed: int, trial: int, stream: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(trial, STREAMS[stream])))


@dataclass
class Tally:
    """Merge-based accumulator: integer counters keyed by name."""

    trials: int = 0
    counts: dict[str, int] = field(default_factory=dict)

    def add(self, outcome: dict[str, int]) -> None:
        self.trials += 1
        for key, value in outcome.items():
            self.counts[key] = self.counts.get(key, 0) + int(value)

    def merge(self, other: "Tally") -> "Tally":
        out = Tally(self.trials + other.trials, dict(self.counts))
        for key, value in other.counts.items():
            out.counts[key] = out.counts.get(key, 0) + value
        return out

    def get(self, key: str) -> int:
        return self.counts.get(key, 0)


def wilson_interval(successes: int, trials: int, confidence: float = 0.99) -> tuple[float, float]:
    """Score interval for a binomial proportion."""
    if trials <= 0:
        raise DomainError("need at least one trial")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(centre - half, 0.0), min(centre + half, 1.0)


@dataclass(frozen=True)
class Estimate:
    """Empirical frequency of an event with a score interval."""

    events: int
    trials: int
    confidence: float = 0.99

    @property
    def frequency(self) -> float:
        return self.events / self.trials

    @property
    def interval(self) -> tuple[float, float]:
        return wilson_interval(self.events, self.trials, self.confidence)


def _run_chunk(trial_fn: Callable[[int, int], dict[str, int]], seed: int, start: int, stop: int) -> Tally:
    tally = Tally()
    for t in range(start, stop):
        tally.add(trial_fn(seed, t))
    return tally


def run_trials(trial_fn: Callable[[int, int], dict[str, int]], trials: int, seed: int, workers: int = 1) -> Tally:
    """Run ``trial_fn(seed, t)`` for ``t < trials`` and merge the outcomes.

    ``trial_fn`` must be picklable when ``workers > 1``.
    """
    if trials < 0:
        raise DomainError("trials must be non-negative")
    if workers < 1:
        raise ConfigurationError("workers must be at least 1")
    bounds = [(s, min(s + CHUNK_SIZE, trials)) for s in range(0, trials, CHUNK_SIZE)]
    if workers == 1 or len(bounds) <= 1:
        parts = [_run_chunk(trial_fn, seed, a, b) for a, b in bounds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(partial(_run_chunk, trial_fn, seed), *zip(*bounds)))
    total = Tally()
    for part in parts:
        total = total.merge(part)
    return total


# --------------------------------------------------------------------------
# honest run


@dataclass(frozen=True)
class HonestConfig:
    """Settings of an all-honest signing and forwarding run.

    With ``mismatch_rate`` set, each recipient's key differs from the
    sender's by i.i.d. flips at that rate and no KGP is sampled. Otherwise
    both keys come from :func:`qds.kgp.run_kgp` with ``n_pulses`` pulses and
    key length ``L``.
    """

    L: int
    s_a: float
    s_v: float
    mismatch_rate: float | None = None
    channel: ChannelParams = ChannelParams()
    decoy: DecoySettings = DecoySettings()
    n_pulses: int | None = None
    k: int | None = None

    def __post_init__(self):
        if self.L < 2 or self.L % 2:
            raise ConfigurationError("L must be a positive even length")
        if not 0.0 < self.s_a < self.s_v < 0.5:
            raise ConfigurationError("need 0 < s_a < s_v < 1/2")
        if self.mismatch_rate is None and self.n_pulses is None:
            raise ConfigurationError("give either mismatch_rate or n_pulses")
        if self.mismatch_rate is not None and not 0.0 <= self.mismatch_rate <= 1.0:
            raise ConfigurationError("mismatch_rate must be a probability")


def _honest_keys(config: HonestConfig, seed: int, trial: int, stream: str, holder: PartyId):
    if config.mismatch_rate is not None:
        rng = trial_rng(seed, trial, stream)
        bits = rng.integers(0, 2, config.L, dtype=np.uint8)
        flips = (rng.random(config.L) < config.mismatch_rate).astype(np.uint8)
        return KeyString(bits ^ flips, PartyId.ALICE), KeyString(bits, holder)
    k = config.k if config.k is not None else max(1, config.L // 20)
    run = run_kgp(config.n_pulses, config.channel, config.decoy, trial_rng(seed, trial, stream), L=config.L, k=k, receiver=holder)
    return run.sender_key, run.receiver_key


def honest_trial(config: HonestConfig, seed: int, trial: int) -> dict[str, int]:
    """One honest run: sign, Bob verifies at ``s_a``, Charlie at ``s_v``."""
    alice_b, bob = _honest_keys(config, seed, trial, "kgp_bob", PartyId.BOB)
    alice_c, charlie = _honest_keys(config, seed, trial, "kgp_charlie", PartyId.CHARLIE)
    message = int(trial_rng(seed, trial, "alice").integers(0, 2))
    s_bob, s_charlie = symmetrise(bob, charlie, trial_rng(seed, trial, "bob"))
    decl = Declaration(message, (alice_b.bits, alice_c.bits))
    bob_verdict = verify(decl, s_bob, config.s_a)
    charlie_verdict = verify(decl, s_charlie, config.s_v)
    accepted = bob_verdict.accepted
    transferred = accepted and charlie_verdict.accepted
    return {
        "accepted": accepted,
        "transferred": transferred,
        "aborted": not transferred,
        "charlie_rejected": not charlie_verdict.accepted,
    }


def run_honest_scenario(config: HonestConfig, rng_seed: int, trials: int = 1, workers: int = 1) -> Tally:
    return run_trials(partial(honest_trial, config), trials, rng_seed, workers)


# --------------------------------------------------------------------------
# repudiation


@dataclass(frozen=True)
class RepudiationConfig:
    strategy: AdversaryStrategy
    L: int
    s_a: float
    s_v: float

    def __post_init__(self):
        if self.strategy.kind != "repudiating_alice":
            raise ConfigurationError("repudiation needs a repudiating_alice strategy")
        if self.L < 2 or self.L % 2:
            raise ConfigurationError("L must be a positive even length")
        if not 0.0 <= self.s_a < self.s_v <= 1.0:
            raise ConfigurationError("need 0 <= s_a < s_v")


def _planted(rng: np.random.Generator, L: int, rate: float) -> np.ndarray:
    mask = np.zeros(L, dtype=np.uint8)
    mask[rng.permutation(L)[: int(round(rate * L))]] = 1
    return mask


def repudiation_trial(config: RepudiationConfig, seed: int, trial: int) -> dict[str, int]:
    """Alice plants exact mismatch counts; success is Bob accepting and Charlie rejecting."""
    L = config.L
    bob_bits = trial_rng(seed, trial, "kgp_bob").integers(0, 2, L, dtype=np.uint8)
    charlie_bits = trial_rng(seed, trial, "kgp_charlie").integers(0, 2, L, dtype=np.uint8)
    alice = trial_rng(seed, trial, "alice")
    mask_b = _planted(alice, L, config.strategy.e_b)
    mask_c = _planted(alice, L, config.strategy.e_c)
    decl = Declaration(0, (bob_bits ^ mask_b, charlie_bits ^ mask_c))
    s_bob, s_charlie = symmetrise(
        KeyString(bob_bits, PartyId.BOB),
        KeyString(charlie_bits, PartyId.CHARLIE),
        trial_rng(seed, trial, "bob"),
    )
    bob_ok = verify(decl, s_bob, config.s_a).accepted
    charlie_ok = verify(decl, s_charlie, config.s_v).accepted
    kept_c = int(mask_c[s_charlie.positions[s_charlie.direct]].sum())
    return {
        "repudiated": bob_ok and not charlie_ok,
        "bob_accepted": bob_ok,
        "kept_c_mismatches": kept_c,
        "kept_c_mismatches_sq": kept_c * kept_c,
    }


def run_repudiation_scenario(
    strategy: AdversaryStrategy,
    L: int,
    s_a: float,
    s_v: float,
    trials: int,
    rng_seed: int,
    workers: int = 1,
) -> tuple[Estimate, Tally]:
    """Empirical repudiation probability with its 99% score interval."""
    config = RepudiationConfig(strategy, L, s_a, s_v)
    tally = run_trials(partial(repudiation_trial, config), trials, rng_seed, workers)
    return Estimate(tally.get("repudiated"), trials), tally


# --------------------------------------------------------------------------
# forgery


@dataclass(frozen=True)
class ForgeryConfig:
    forger_error_rate: float
    L: int
    s_v: float

    def __post_init__(self):
        if not 0.0 <= self.forger_error_rate <= 0.5:
            raise ConfigurationError("forger_error_rate must lie in [0, 1/2]")
        if self.L < 2 or self.L % 2:
            raise ConfigurationError("L must be a positive even length")
        if not 0.0 < self.s_v <= 0.5:
            raise ConfigurationError("s_v must lie in (0, 1/2]")


def forgery_trial(config: ForgeryConfig, seed: int, trial: int) -> dict[str, int]:
    """Bob forges a declaration to Charlie, guessing the half he never saw."""
    L = config.L
    bob_bits = trial_rng(seed, trial, "kgp_bob").integers(0, 2, L, dtype=np.uint8)
    charlie_bits = trial_rng(seed, trial, "kgp_charlie").integers(0, 2, L, dtype=np.uint8)
    s_bob, s_charlie = symmetrise(
        KeyString(bob_bits, PartyId.BOB),
        KeyString(charlie_bits, PartyId.CHARLIE),
        trial_rng(seed, trial, "charlie"),
    )
    # Bob knows Charlie's forwarded half exactly and must guess the rest.
    known = np.zeros(L, dtype=bool)
    known[s_bob.positions[s_bob.forwarded]] = True
    guess_rng = trial_rng(seed, trial, "bob")
    wrong = (guess_rng.random(L) < config.forger_error_rate) & ~known
    forged = Declaration(1, (bob_bits, charlie_bits ^ wrong.astype(np.uint8)))
    verdict = verify(forged, s_charlie, config.s_v)
    return {"forged": verdict.accepted, "direct_mismatches": verdict.mismatches_direct}


def run_forgery_scenario(
    forger_error_rate: float,
    L: int,
    s_v: float,
    trials: int,
    rng_seed: int,
    workers: int = 1,
) -> tuple[Estimate, Tally]:
    """Empirical success probability of an i.i.d. guessing forger."""
    config = ForgeryConfig(forger_error_rate, L, s_v)
    tally = run_trials(partial(forgery_trial, config), trials, rng_seed, workers)
    return Estimate(tally.get("forged"), trials), tally


# --------------------------------------------------------------------------
# estimator soundness


@dataclass(frozen=True)
class SoundnessConfig:
    """One KGP run per trial, checked against the tagged ground truth."""

    n_pulses: int
    eps_pe: float
    alpha1: float
    channel: ChannelParams = ChannelParams()
    decoy: DecoySettings = DecoySettings()
    convention: str = "key_block"
    k_ratio: float = 0.1


def soundness_trial(config: SoundnessConfig, seed: int, trial: int) -> dict[str, int]:
    """Which of the four finite-size bounds hold in this run.

    Runs whose estimate aborts count as neither holding nor failing and are
    reported under ``aborted``.
    """
    from .errors import EstimationError, InsufficientCountsError
    from .estimation import estimate

    try:
        run = run_kgp(
            config.n_pulses,
            config.channel,
            config.decoy,
            trial_rng(seed, trial, "kgp_bob"),
            k_ratio=config.k_ratio,
            with_keys=False,
        )
        est = estimate(run.stats, config.decoy, config.eps_pe, config.alpha1, convention=config.convention)
    except (EstimationError, InsufficientCountsError):
        return {"aborted": 1}
    truth = run.truth
    return {
        "aborted": 0,
        "s_x0_holds": est.s_x0_lower <= truth.s_x0,
        "s_x1_holds": est.s_x1_lower <= truth.s_x1,
        "phi_x1_holds": est.phi_x1_upper >= truth.phi_x1,
        "e_x_holds": est.e_x_upper >= truth.e_x,
    }


def run_soundness_check(config: SoundnessConfig, trials: int, rng_seed: int, workers: int = 1) -> Tally:
    return run_trials(partial(soundness_trial, config), trials, rng_seed, workers)
