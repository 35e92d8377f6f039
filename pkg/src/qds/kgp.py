"""Stochastic sampler for one run of the decoy-state key generation protocol.

Every pulse is an independent draw of intensity, photon number, both basis
choices, detection and bit error. Because pulses are i.i.d., the joint counts
over outcome classes are multinomial, and the sampler draws them directly
instead of looping over ``n_pulses`` pulses. The random selection of
``L + k`` sifted X detections and their split into the estimation sample
``V``, the kept key and the forwarded key is a sequence of multivariate
hypergeometric draws over the same classes.

Photon numbers are tracked as ``0``, ``1`` and ``2+`` so the ground-truth
vacuum and single-photon contributions are known. Parties never see them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import split_sample
from .channel import ChannelParams, DecoySettings, system_transmittance
from .errors import DomainError, InsufficientCountsError
from .estimation import CountStatistics
from .protocol import KeyString, PartyId

#: Photon-number classes: vacuum, single photon, two or more.
PHOTON_CLASSES = 3


@dataclass(frozen=True)
class GroundTruth:
    """Tagged quantities of the kept key that the estimator bounds."""

    s_x0: int
    s_x1: int
    x_errors: int
    phase_errors_x1: int
    z_single_photon_counts: int
    z_single_photon_errors: int
    n: int

    @property
    def e_x(self) -> float:
        return self.x_errors / self.n

    @property
    def phi_x1(self) -> float:
        """Phase error rate of the single-photon kept events (0 when there are none)."""
        return self.phase_errors_x1 / self.s_x1 if self.s_x1 else 0.0

    @property
    def z_single_photon_error_ratio(self) -> float:
        if self.z_single_photon_counts == 0:
            return 0.0
        return self.z_single_photon_errors / self.z_single_photon_counts


@dataclass(frozen=True, eq=False)
class KGPRun:
    sender_key: KeyString | None
    receiver_key: KeyString | None
    stats: CountStatistics
    truth: GroundTruth
    x_sifted: int
    z_sifted: int

    def __iter__(self):
        return iter((self.sender_key, self.receiver_key, self.stats))


def _class_probabilities(u: float, eta: float, p_d: float, q: float) -> tuple[np.ndarray, np.ndarray]:
    """Joint probabilities of (photon class, detected) and (photon class, detected with error).

    A pulse with ``j`` photons clicks with probability
    ``1 - (1 - 2 p_d)(1 - eta)**j`` and errs with probability
    ``(1 - (1 - eta)**j) q + (1 - eta)**j p_d``; the ``2+`` class is what is
    left of the intensity-averaged totals.
    """
    poisson = np.array([math.exp(-u), u * math.exp(-u)])
    miss = np.array([1.0, 1.0 - eta])
    detect01 = poisson * (1.0 - (1.0 - 2.0 * p_d) * miss)
    error01 = poisson * ((1.0 - miss) * q + miss * p_d)
    atten = math.exp(-u * eta)
    detect_all = 1.0 - (1.0 - 2.0 * p_d) * atten
    error_all = (1.0 - atten) * q + atten * p_d
    detect = np.append(detect01, max(detect_all - detect01.sum(), 0.0))
    error = np.append(error01, max(error_all - error01.sum(), 0.0))
    return detect, np.minimum(error, detect)


def outcome_probabilities(channel: ChannelParams, decoy: DecoySettings) -> tuple[np.ndarray, np.ndarray]:
    """Per-pulse probabilities of sifted outcomes, shape ``(basis, intensity, class, error)``.

    Basis 0 is X, 1 is Z. Sender and receiver pick their bases independently,
    so a pulse is sifted into X with probability ``p_X**2``. The second
    value is the error rate a single-photon X event would show if measured
    in Z, used only for the tagged phase-error truth.
    """
    eta = system_transmittance(channel)
    p_d = channel.dark_count_prob
    probs = np.zeros((2, 3, PHOTON_CLASSES, 2))
    for b, (p_b, q) in enumerate(
        ((decoy.basis_prob_x, channel.optical_error_x), (decoy.basis_prob_z, channel.optical_error_z))
    ):
        for i, (u, p_u) in enumerate(zip(decoy.intensities, decoy.intensity_probs)):
            detect, error = _class_probabilities(u, eta, p_d, q)
            weight = p_u * p_b * p_b
            probs[b, i, :, 1] = weight * error
            probs[b, i, :, 0] = weight * (detect - error)
    y1 = 1.0 - (1.0 - 2.0 * p_d) * (1.0 - eta)
    phase = (eta * channel.optical_error_z + (1.0 - eta) * p_d) / y1 if y1 > 0 else 0.0
    return probs, np.array(phase)


def _split(rng: np.random.Generator, counts: np.ndarray, size: int) -> tuple[np.ndarray, np.ndarray]:
    flat = counts.ravel()
    chosen = rng.multivariate_hypergeometric(flat, size) if size else np.zeros_like(flat)
    return chosen.reshape(counts.shape), (flat - chosen).reshape(counts.shape)


def _flags(rng: np.random.Generator, block: np.ndarray) -> np.ndarray:
    """Shuffled per-event error flags for a block of ``(intensity, class, error)`` counts."""
    errors = int(block[..., 1].sum())
    flags = np.zeros(int(block.sum()), dtype=np.uint8)
    flags[:errors] = 1
    rng.shuffle(flags)
    return flags


def run_kgp(
    n_pulses: int,
    channel: ChannelParams,
    decoy: DecoySettings,
    rng_seed,
    L: int | None = None,
    k: int | None = None,
    k_ratio: float = 0.1,
    with_keys: bool = True,
    message_slot: int = 0,
    receiver: PartyId = PartyId.BOB,
) -> KGPRun:
    """Sample one key generation run of ``n_pulses`` pulses.

    Parameters
    ----------
    n_pulses : int
        Pulses sent by the sender.
    channel, decoy : ChannelParams, DecoySettings
        Link and source settings.
    rng_seed : int, SeedSequence or Generator
        Source of randomness. Equal seeds give bit-identical runs.
    L, k : int, optional
        Key length and estimation sample size. When omitted they follow
        from the sampled sifted X count, as in the mean-value analysis.
    with_keys : bool
        Skip building the bit strings when only statistics are needed.

    Returns
    -------
    KGPRun
        Unpacks as ``(sender_key, receiver_key, stats)``. The receiver key
        records which half is forwarded during symmetrisation.

    Raises
    ------
    InsufficientCountsError
        When fewer than ``L + k`` X detections were sifted.
    """
    if n_pulses < 1:
        raise DomainError("n_pulses must be at least 1")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    probs, phase_rate = outcome_probabilities(channel, decoy)
    flat = probs.ravel()
    pvals = np.append(flat, max(1.0 - flat.sum(), 0.0))
    counts = rng.multinomial(int(n_pulses), pvals / pvals.sum())[:-1].reshape(probs.shape)
    x_counts, z_counts = counts[0], counts[1]
    x_total = int(x_counts.sum())
    if L is None or k is None:
        L_auto, k_auto = split_sample(x_total, k_ratio)
        L = L_auto if L is None else L
        k = k_auto if k is None else k
    if L < 2 or L % 2 or k < 1:
        raise InsufficientCountsError(f"sifted X count {x_total} too small for a key (L={L}, k={k})")
    if x_total < L + k:
        raise InsufficientCountsError(f"only {x_total} sifted X counts, need L + k = {L + k}")
    n = L // 2
    sample, _ = _split(rng, x_counts, L + k)
    v_block, rest = _split(rng, sample, k)
    keep, forward = _split(rng, rest, n)

    stats = CountStatistics(
        n_x=tuple(int(c) for c in sample.sum(axis=(1, 2))),
        n_z=tuple(int(c) for c in z_counts.sum(axis=(1, 2))),
        m_z=tuple(int(c) for c in z_counts[..., 1].sum(axis=1)),
        observed_ex=float(v_block[..., 1].sum()) / k,
        L=L,
        k=k,
        x_sifted_total=float(x_total),
    )
    s_x1 = int(keep[:, 1, :].sum())
    truth = GroundTruth(
        s_x0=int(keep[:, 0, :].sum()),
        s_x1=s_x1,
        x_errors=int(keep[..., 1].sum()),
        phase_errors_x1=int(rng.binomial(s_x1, float(phase_rate))) if s_x1 else 0,
        z_single_photon_counts=int(z_counts[:, 1, :].sum()),
        z_single_photon_errors=int(z_counts[:, 1, 1].sum()),
        n=n,
    )
    sender = receiver_key = None
    if with_keys:
        order = rng.permutation(L)
        keep_pos, fwd_pos = np.sort(order[:n]), np.sort(order[n:])
        flags = np.zeros(L, dtype=np.uint8)
        flags[keep_pos] = _flags(rng, keep)
        flags[fwd_pos] = _flags(rng, forward)
        bits = rng.integers(0, 2, size=L, dtype=np.uint8)
        sender = KeyString(bits ^ flags, PartyId.ALICE, message_slot)
        receiver_key = KeyString(bits, receiver, message_slot, forward_positions=fwd_pos)
    return KGPRun(sender, receiver_key, stats, truth, x_total, int(z_counts.sum()))
