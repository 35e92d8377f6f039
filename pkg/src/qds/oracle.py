"""Brute-force guessing oracle for classical joint distributions.

For a joint distribution ``P(x, f)`` over ``n``-bit strings ``x`` and guess
labels ``f``, computes exactly the best average probability of guessing ``x``
to within Hamming distance ``r`` and the classical min-entropy
``H_min(X|F) = -log2 sum_f max_x P(x, f)``. Comparing the two checks the
ball-volume guessing bound ``<p_r> <= b(n, r) 2**-H_min`` independently of
the analytic code path.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

MAX_BITS = 12


def hamming_distances(n_bits: int) -> np.ndarray:
    """``(2**n, 2**n)`` matrix of pairwise Hamming distances."""
    xs = np.arange(1 << n_bits, dtype=np.int64)
    diff = xs[:, None] ^ xs[None, :]
    dist = np.zeros_like(diff)
    for bit in range(n_bits):
        dist += (diff >> bit) & 1
    return dist


def guessing_oracle(joint: np.ndarray, r: int) -> tuple[float, float]:
    """Exact optimal within-``r`` guessing probability and classical min-entropy.

    Parameters
    ----------
    joint : ndarray, shape (2**n, m)
        ``joint[x, f]`` is the probability of string ``x`` together with
        side information ``f``. Must sum to 1.
    r : int
        Number of tolerated bit errors.

    Returns
    -------
    (avg_success, h_min_classical)
    """
    joint = np.asarray(joint, dtype=float)
    if joint.ndim != 2:
        raise DomainError("joint must be a 2-d array indexed by (x, f)")
    size = joint.shape[0]
    n_bits = size.bit_length() - 1
    if size != 1 << n_bits:
        raise DomainError(f"first axis must have length 2**n, got {size}")
    if n_bits > MAX_BITS:
        raise DomainError(f"oracle limited to n <= {MAX_BITS} bits, got {n_bits}")
    if np.any(joint < 0) or abs(joint.sum() - 1.0) > 1e-12:
        raise DomainError("joint must be a normalised probability distribution")
    if not 0 <= r <= n_bits:
        raise DomainError(f"r must lie in [0, {n_bits}], got {r}")
    ball = (hamming_distances(n_bits) <= r).astype(float)
    # ball_mass[x, f] = P(X within distance r of x, F = f)
    ball_mass = ball @ joint
    avg_success = float(ball_mass.max(axis=0).sum())
    guess_prob = float(joint.max(axis=0).sum())
    return avg_success, -math.log2(guess_prob)


def random_joint(n_bits: int, n_labels: int, rng: np.random.Generator, concentration: float = 1.0) -> np.ndarray:
    """A Dirichlet-distributed joint over ``(x, f)``."""
    weights = rng.dirichlet(np.full((1 << n_bits) * n_labels, concentration))
    return weights.reshape(1 << n_bits, n_labels)


def noisy_copy_joint(n_bits: int, flip: float) -> np.ndarray:
    """Uniform ``x`` observed through a binary symmetric channel: ``f`` is ``x`` with iid flips."""
    dist = hamming_distances(n_bits)
    joint = flip**dist * (1.0 - flip) ** (n_bits - dist)
    return joint / joint.sum()
