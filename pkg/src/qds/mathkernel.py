"""Numeric primitives shared by the estimator and the security analysis.

Everything here is a pure function of its arguments. Probabilities that can
become astronomically small (forging bounds of order 2**-14000) are carried
as base-2 logarithms; see :func:`log2_sum` and :func:`linear`.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DomainError, GammaDomainError

#: Largest ``n`` for which :func:`log2_binom_tail` sums the series exactly.
EXACT_BINOM_LIMIT = 10_000

_BISECTION_STEPS = 200


def binary_entropy(x: float) -> float:
    """Shannon entropy, in bits, of a Bernoulli(x) variable."""
    if not 0.0 <= x <= 1.0 or math.isnan(x):
        raise DomainError(f"binary_entropy needs x in [0, 1], got {x!r}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def inverse_binary_entropy(y: float) -> float:
    """Return the unique ``x`` in [0, 1/2] with ``binary_entropy(x) == y``.

    Plain bisection: h is strictly increasing on [0, 1/2], so it always
    converges; the loop stops once the bracket is below 1e-15 wide.
    """
    if not 0.0 <= y <= 1.0 or math.isnan(y):
        raise DomainError(f"inverse_binary_entropy needs y in [0, 1], got {y!r}")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return 0.5 * (lo + hi)


class BinomTail(NamedTuple):
    """log2 of ``sum_{j<=r} C(n, j)`` and whether it was summed exactly."""

    log2_value: float
    exact: bool


def _log2_binom(n: int, j: int) -> float:
    return (math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1)) / math.log(2)


def log2_binom_tail(n: int, r: int) -> BinomTail:
    """log2 of the Hamming-ball volume ``b(n, r) = sum_{j=0}^{r} C(n, j)``.

    For ``n <= EXACT_BINOM_LIMIT`` the terms are accumulated in log space.
    Beyond that the entropy approximation ``n * h(r/n)`` is used instead,
    which is an upper bound whenever ``r <= n/2``.
    """
    n, r = int(n), int(r)
    if n < 0 or r < 0 or r > n:
        raise DomainError(f"log2_binom_tail needs 0 <= r <= n, got n={n}, r={r}")
    if n <= EXACT_BINOM_LIMIT:
        terms = np.array([_log2_binom(n, j) for j in range(r + 1)])
        value = float(np.logaddexp2.reduce(terms))
        # lgamma rounding can leave C(n,0) a hair off zero
        if r == 0:
            value = 0.0
        elif r == n:
            value = float(n)
        return BinomTail(value, True)
    return BinomTail(n * binary_entropy(r / n), False)


def _check_eps(eps: float, name: str) -> None:
    if not 0.0 < eps < 1.0:
        raise DomainError(f"{name} must lie strictly between 0 and 1, got {eps!r}")


def hoeffding_delta(sample: float, eps: float) -> float:
    """Hoeffding deviation ``sqrt(sample * ln(1/eps) / 2)`` on a count."""
    _check_eps(eps, "eps")
    if sample < 0:
        raise DomainError(f"sample size must be non-negative, got {sample!r}")
    return math.sqrt(sample * math.log(1.0 / eps) / 2.0)


def serfling_delta(n: float, k: float, eps_pe: float) -> float:
    """Serfling deviation on an error *rate* estimated from ``k`` of ``n + k`` bits.

    ``sqrt( ln(1/eps) / (2k) * (1 - (k - 1)/n) )``
    """
    _check_eps(eps_pe, "eps_pe")
    if k < 1:
        raise DomainError(f"serfling_delta needs k >= 1, got {k!r}")
    if n < k:
        raise DomainError(f"serfling_delta needs n >= k, got n={n!r}, k={k!r}")
    correction = 1.0 - (k - 1.0) / n
    return math.sqrt(math.log(1.0 / eps_pe) / (2.0 * k) * correction)


def gamma_correction(a: float, b: float, c: float, d: float, *, clamp: bool = False) -> float:
    """Finite-sampling correction between the Z bit-error and X phase-error rates.

    ``sqrt( (c+d)(1-b)b / (c d ln2) * log2( (c+d) / (c d (1-b) b) / a**2 ) )``

    With ``clamp=False`` (the default) any argument that leaves the formula
    undefined raises :class:`GammaDomainError`: ``b`` outside (0, 1), or a
    log argument below 1. With ``clamp=True`` those cases contribute 0.
    """
    if a <= 0 or c <= 0 or d <= 0:
        raise GammaDomainError(f"gamma_correction needs a, c, d > 0, got a={a!r}, c={c!r}, d={d!r}")
    if not 0.0 < b < 1.0:
        if clamp:
            return 0.0
        raise GammaDomainError(f"gamma_correction needs 0 < b < 1, got b={b!r}")
    spread = (c + d) * (1.0 - b) * b / (c * d)
    log_arg_log2 = math.log2(c + d) - math.log2(c * d * (1.0 - b) * b) - 2.0 * math.log2(a)
    if log_arg_log2 < 0.0:
        if clamp:
            return 0.0
        raise GammaDomainError(
            f"gamma_correction log argument below 1 (log2 = {log_arg_log2:.3g}); "
            "enable gamma clamping to treat this as a zero correction"
        )
    return math.sqrt(spread / math.log(2.0) * log_arg_log2)


def log2_sum(*log2_terms: float) -> float:
    """log2 of a sum of terms given as log2 values (``-inf`` for zero)."""
    return float(np.logaddexp2.reduce(np.asarray(log2_terms, dtype=float)))


def linear(log2_value: float) -> float:
    """Convert a log2 probability bound to linear scale, capped at 1."""
    if log2_value >= 0.0:
        return 1.0
    return 2.0 ** log2_value


def safe_log2(x: float) -> float:
    return math.log2(x) if x > 0 else -math.inf
