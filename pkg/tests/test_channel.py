import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qds.channel import (
    ChannelParams,
    DecoySettings,
    bit_error_rate,
    detection_rate,
    expected_statistics,
    system_transmittance,
)
from qds.errors import ConfigurationError


def test_transmittance_reference_link(channel):
    assert system_transmittance(channel) == pytest.approx(0.0107, abs=1e-4)


def test_transmittance_lossless_and_plain():
    assert system_transmittance(ChannelParams(distance_km=0, receiver_loss_db=0, detector_efficiency=1)) == 1.0
    ten_km = ChannelParams(distance_km=10, receiver_loss_db=0, detector_efficiency=1)
    assert system_transmittance(ten_km) == pytest.approx(10**-0.2, rel=1e-12)


def test_detection_rate_limits():
    assert detection_rate(0.0, 0.5, 0.0) == 0.0
    assert detection_rate(1e4, 0.5, 0.0) == pytest.approx(1.0)
    assert detection_rate(0.425, 0.0107, 2.1e-5) == pytest.approx(4.58e-3, rel=5e-3)


def test_bit_error_rate_limits():
    assert bit_error_rate(0.0, 0.1, 1e-4, 0.02) == pytest.approx(0.5)
    assert bit_error_rate(1e4, 0.5, 0.0, 0.03) == pytest.approx(0.03)
    with pytest.raises(ZeroDivisionError):
        bit_error_rate(0.0, 0.1, 0.0, 0.02)


def test_bit_error_rate_plug_in():
    u, eta, p_d, q = 0.425, 0.0107, 2.1e-5, 0.0076
    att = math.exp(-u * eta)
    expected = ((1 - att) * q + att * p_d) / (1 - (1 - 2 * p_d) * att)
    assert bit_error_rate(u, eta, p_d, q) == pytest.approx(expected, rel=1e-13)


@given(
    st.floats(0.0, 2.0), st.floats(0.0, 2.0), st.floats(1e-4, 1.0), st.floats(1e-4, 1.0), st.floats(0.0, 1e-3)
)
def test_detection_rate_monotone(u1, u2, eta1, eta2, p_d):
    lo, hi = sorted((u1, u2))
    assert detection_rate(lo, eta1, p_d) <= detection_rate(hi, eta1, p_d) + 1e-15
    lo, hi = sorted((eta1, eta2))
    assert detection_rate(u1, lo, p_d) <= detection_rate(u1, hi, p_d) + 1e-15
    assert detection_rate(u1, eta1, p_d) <= detection_rate(u1, eta1, p_d * 2 + 1e-6) + 1e-15


@given(st.floats(1e-3, 2.0), st.floats(1e-4, 1.0), st.floats(0.0, 1e-3), st.floats(0.0, 0.5))
def test_bit_error_rate_band(u, eta, p_d, q):
    rate = detection_rate(u, eta, p_d)
    e = bit_error_rate(u, eta, p_d, q)
    assert q * (1 - math.exp(-u * eta)) / rate - 1e-12 <= e <= 0.5 + 1e-12


def test_reference_expected_statistics(channel, decoy):
    stats = expected_statistics(6.3e8, channel, decoy)
    assert stats.expected_x_raw == pytest.approx(8.10e5, rel=0.02)
    assert stats.expected_observed_ex == pytest.approx(0.0287, abs=0.001)
    assert stats.notes


def test_zero_pulses(channel, decoy):
    stats = expected_statistics(0, channel, decoy)
    assert stats.expected_x_raw == 0 and stats.expected_z_raw == 0
    assert stats.expected_observed_ex == 0


def test_linear_in_pulses(channel, decoy):
    a = expected_statistics(1e8, channel, decoy)
    b = expected_statistics(2e8, channel, decoy)
    assert np.array_equal(np.array(b.x_sifted), 2 * np.array(a.x_sifted))
    assert np.array_equal(np.array(b.z_sifted), 2 * np.array(a.z_sifted))


def test_squared_convention_factor(channel, decoy):
    single = expected_statistics(1e8, channel, decoy, "single_px")
    squared = expected_statistics(1e8, channel, decoy, "squared_px")
    for s, q in zip(single.x_sifted, squared.x_sifted):
        assert q == pytest.approx(decoy.basis_prob_x * s, rel=1e-14)
    assert not squared.notes


@pytest.mark.parametrize(
    "kwargs",
    [
        {"intensities": (0.1, 0.2, 0.0)},
        {"intensities": (0.1, 0.06, 0.05)},
        {"intensity_probs": (0.5, 0.4, 0.2)},
        {"basis_prob_x": 0.4},
        {"basis_prob_x": 1.0},
    ],
)
def test_decoy_validation(kwargs):
    with pytest.raises(ConfigurationError):
        DecoySettings(**kwargs)


def test_channel_validation():
    with pytest.raises(ConfigurationError):
        ChannelParams(dark_count_prob=1.5)
    with pytest.raises(ConfigurationError):
        ChannelParams(distance_km=-1)
