import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qds.errors import DomainError, GammaDomainError
from qds.mathkernel import (
    EXACT_BINOM_LIMIT,
    binary_entropy,
    gamma_correction,
    hoeffding_delta,
    inverse_binary_entropy,
    linear,
    log2_binom_tail,
    log2_sum,
    serfling_delta,
)

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def mp_entropy(x):
    x = mpmath.mpf(x)
    return -x * mpmath.log(x, 2) - (1 - x) * mpmath.log(1 - x, 2)


class TestBinaryEntropy:
    def test_endpoints(self):
        assert binary_entropy(0.5) == 1.0
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0

    def test_against_high_precision(self):
        with mpmath.workdps(40):
            expected = float(mp_entropy("0.11"))
        assert expected == pytest.approx(0.499916, abs=1e-6)
        assert binary_entropy(0.11) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("x", [-1e-9, 1.0 + 1e-9, math.nan])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            binary_entropy(x)

    @given(unit)
    def test_symmetric(self, x):
        assert binary_entropy(x) == pytest.approx(binary_entropy(1.0 - x), abs=1e-12)

    @given(st.floats(0.0, 0.5), st.floats(0.0, 0.5))
    def test_increasing_on_lower_half(self, a, b):
        lo, hi = sorted((a, b))
        if lo < hi:
            assert binary_entropy(lo) <= binary_entropy(hi)


class TestInverseBinaryEntropy:
    def test_endpoints(self):
        assert inverse_binary_entropy(1.0) == 0.5
        assert inverse_binary_entropy(0.0) == 0.0

    def test_round_trip_from_x(self):
        assert inverse_binary_entropy(binary_entropy(0.0696)) == pytest.approx(0.0696, abs=1e-9)

    @given(unit)
    def test_round_trip_from_y(self, y):
        x = inverse_binary_entropy(y)
        assert 0.0 <= x <= 0.5
        assert binary_entropy(x) == pytest.approx(y, abs=1e-9)

    def test_absolute_accuracy(self):
        for x in np.linspace(1e-6, 0.5, 97):
            assert inverse_binary_entropy(binary_entropy(x)) == pytest.approx(x, abs=1e-12 + 1e-9 * (x < 1e-4))

    def test_domain(self):
        with pytest.raises(DomainError):
            inverse_binary_entropy(1.5)


def pascal_tail(n, r):
    row = [1]
    for _ in range(n):
        row = [1] + [row[i] + row[i + 1] for i in range(len(row) - 1)] + [1]
    return sum(row[: r + 1])


class TestBinomTail:
    def test_examples(self):
        assert log2_binom_tail(10, 0).log2_value == 0.0
        assert log2_binom_tail(10, 10).log2_value == 10.0
        assert log2_binom_tail(10, 3).log2_value == pytest.approx(math.log2(176), abs=1e-12)

    def test_matches_pascal_triangle(self):
        for n in range(31):
            for r in range(n + 1):
                tail = log2_binom_tail(n, r)
                assert tail.exact
                assert tail.log2_value == pytest.approx(math.log2(pascal_tail(n, r)), abs=1e-9)

    def test_path_recorded(self):
        assert log2_binom_tail(EXACT_BINOM_LIMIT, 5).exact
        assert not log2_binom_tail(EXACT_BINOM_LIMIT + 1, 5).exact

    def test_entropy_approximation_close_at_switchover(self):
        n = 10_000
        for frac in np.linspace(0.01, 0.49, 25):
            r = int(frac * n)
            exact = log2_binom_tail(n, r).log2_value
            approx = n * binary_entropy(r / n)
            assert 0.0 <= approx - exact <= 20.0

    def test_domain(self):
        with pytest.raises(DomainError):
            log2_binom_tail(5, 6)


class TestConcentration:
    def test_hoeffding_examples(self):
        assert hoeffding_delta(2, math.exp(-2)) == pytest.approx(math.sqrt(2))
        assert hoeffding_delta(1, math.exp(-2)) == pytest.approx(1.0)
        assert hoeffding_delta(100, 1 - 1e-15) < 1e-6

    def test_serfling_examples(self):
        assert serfling_delta(3.86e5, 3.86e4, 1e-5) == pytest.approx(0.0116, abs=1e-4)
        k = 1000
        assert serfling_delta(1e15, k, 1e-5) == pytest.approx(math.sqrt(math.log(1e5) / (2 * k)), rel=1e-9)
        assert serfling_delta(100, 10, 1 - 1e-15) < 1e-6

    @pytest.mark.parametrize("eps", [0.0, 1.0])
    def test_domain(self, eps):
        with pytest.raises(DomainError):
            hoeffding_delta(10, eps)
        with pytest.raises(DomainError):
            serfling_delta(10, 5, eps)

    def test_serfling_needs_samples(self):
        with pytest.raises(DomainError):
            serfling_delta(10, 0, 0.1)

    @given(st.floats(1.0, 1e12), st.floats(1e-12, 0.5), st.floats(1e-12, 0.5))
    def test_hoeffding_monotone(self, sample, e1, e2):
        lo, hi = sorted((e1, e2))
        assert hoeffding_delta(sample, lo) >= hoeffding_delta(sample, hi)
        assert hoeffding_delta(sample * 2, lo) >= hoeffding_delta(sample, lo)

    @given(st.integers(1, 10**6), st.integers(1, 10**6), st.floats(1e-12, 0.5))
    def test_serfling_decreasing_in_k(self, k1, k2, eps):
        lo, hi = sorted((k1, k2))
        n = 2 * 10**6
        assert serfling_delta(n, lo, eps) >= serfling_delta(n, hi, eps)
        assert serfling_delta(n, lo, eps / 10) >= serfling_delta(n, lo, eps)


class TestGamma:
    def test_symmetric_reduction(self):
        assert gamma_correction(1.0, 0.5, 8.0, 8.0) == pytest.approx(0.0, abs=1e-12)
        c = 2.0
        expected = math.sqrt(1 / (2 * c * math.log(2)) * math.log2(8 / c))
        assert gamma_correction(1.0, 0.5, c, c) == pytest.approx(expected)

    def test_against_high_precision(self):
        a, b, c, d = "1e-10", "0.05", "1e5", "1e5"
        with mpmath.workdps(50):
            a, b, c, d = map(mpmath.mpf, (a, b, c, d))
            spread = (c + d) * (1 - b) * b / (c * d * mpmath.log(2))
            expected = float(mpmath.sqrt(spread * mpmath.log((c + d) / (c * d * (1 - b) * b) / a**2, 2)))
        assert gamma_correction(1e-10, 0.05, 1e5, 1e5) == pytest.approx(expected, rel=1e-12)

    def test_degenerate_b(self):
        with pytest.raises(GammaDomainError):
            gamma_correction(1e-10, 0.0, 1e5, 1e5)
        assert gamma_correction(1e-10, 0.0, 1e5, 1e5, clamp=True) == 0.0

    def test_small_log_argument(self):
        with pytest.raises(GammaDomainError):
            gamma_correction(1.0, 0.5, 100.0, 100.0)
        assert gamma_correction(1.0, 0.5, 100.0, 100.0, clamp=True) == 0.0


class TestLogSpace:
    def test_log2_sum(self):
        assert log2_sum(-3.0, -3.0) == pytest.approx(-2.0)
        assert log2_sum(-math.inf, -5.0) == -5.0
        assert log2_sum(-14000.0, math.log2(1e-4)) == pytest.approx(math.log2(1e-4))

    def test_linear_caps(self):
        assert linear(3.0) == 1.0
        assert linear(-1.0) == 0.5
        assert linear(-math.inf) == 0.0

    def test_exact_rational_sum(self):
        terms = [Fraction(1, 3), Fraction(1, 7), Fraction(1, 11)]
        got = log2_sum(*(math.log2(t) for t in terms))
        assert got == pytest.approx(math.log2(float(sum(terms))), abs=1e-12)
