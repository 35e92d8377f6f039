import math

import numpy as np
import pytest

from qds.channel import ChannelParams, DecoySettings, bit_error_rate, detection_rate, expected_statistics, system_transmittance
from qds.errors import InsufficientCountsError
from qds.kgp import outcome_probabilities, run_kgp

PERFECT = ChannelParams(
    distance_km=0, receiver_loss_db=0, detector_efficiency=1, dark_count_prob=0, optical_error_x=0, optical_error_z=0
)


def test_noiseless_keys_identical():
    sender, receiver, stats = run_kgp(20_000, PERFECT, DecoySettings(), 1)
    assert np.array_equal(sender.bits, receiver.bits)
    assert stats.observed_ex == 0


def test_mismatch_rate_matches_channel_error():
    noisy = ChannelParams(distance_km=0, receiver_loss_db=0, detector_efficiency=1, dark_count_prob=0, optical_error_x=0.05)
    sender, receiver, _ = run_kgp(400_000, noisy, DecoySettings(), 2)
    L = len(sender)
    rate = np.mean(sender.bits != receiver.bits)
    assert abs(rate - 0.05) <= 3 * math.sqrt(0.05 * 0.95 / L)


def test_sifted_count_tracks_mean_value_model(channel, decoy):
    expected = expected_statistics(1e6, channel, decoy, "squared_px").expected_x_raw
    counts = [run_kgp(10**6, channel, decoy, seed, L=100, k=10, with_keys=False).x_sifted for seed in range(20)]
    assert np.mean(counts) == pytest.approx(expected, rel=0.05)


def test_outcome_probabilities_match_channel_formulas(channel, decoy):
    probs, _ = outcome_probabilities(channel, decoy)
    eta = system_transmittance(channel)
    for b, (p_b, q) in enumerate(((decoy.basis_prob_x, channel.optical_error_x), (decoy.basis_prob_z, channel.optical_error_z))):
        for i, (u, p_u) in enumerate(zip(decoy.intensities, decoy.intensity_probs)):
            detected = probs[b, i].sum() / (p_u * p_b * p_b)
            errors = probs[b, i, :, 1].sum() / (p_u * p_b * p_b)
            r = detection_rate(u, eta, channel.dark_count_prob)
            assert detected == pytest.approx(r, rel=1e-12)
            assert errors / detected == pytest.approx(bit_error_rate(u, eta, channel.dark_count_prob, q), rel=1e-10)


def test_deterministic(channel, decoy):
    a = run_kgp(10**7, channel, decoy, 42)
    b = run_kgp(10**7, channel, decoy, 42)
    assert np.array_equal(a.sender_key.bits, b.sender_key.bits)
    assert np.array_equal(a.receiver_key.forward_positions, b.receiver_key.forward_positions)
    assert a.stats == b.stats and a.truth == b.truth


def test_statistics_and_truth_consistent(channel, decoy):
    run = run_kgp(10**7, channel, decoy, 3)
    stats, truth = run.stats, run.truth
    assert sum(stats.n_x) == stats.L + stats.k
    assert stats.x_sifted_total == run.x_sifted
    assert truth.s_x0 + truth.s_x1 <= truth.n == stats.L // 2
    assert truth.x_errors == int(np.sum(run.sender_key.bits != run.receiver_key.bits)) - _forward_errors(run)
    assert len(run.receiver_key.forward_positions) == stats.L // 2


def _forward_errors(run):
    fwd = run.receiver_key.forward_positions
    return int(np.sum(run.sender_key.bits[fwd] != run.receiver_key.bits[fwd]))


def test_insufficient_counts(channel, decoy):
    with pytest.raises(InsufficientCountsError):
        run_kgp(1000, channel, decoy, 0, L=10_000, k=100)
    with pytest.raises(InsufficientCountsError):
        run_kgp(10, channel, decoy, 0)
