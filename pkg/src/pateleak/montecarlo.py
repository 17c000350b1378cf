"""Seeded Monte Carlo checks for the quadrature engine.

Samples are drawn in fixed-size batches, and each batch gets its own
generator seeded with ``(seed, batch_index)``. The result therefore depends
only on ``seed`` and ``n``, whatever order the batches run in.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .noise import NoiseModel
from .rnm import DEFAULT_TOL, as_histogram, noisy_argmax, win_probability

MIN_SAMPLES = 100
BATCH = 1 << 17


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int
    seed: int

    def within(self, reference, n_sigma=3.0):
        return abs(self.mean - reference) <= n_sigma * self.std_error


def _batches(n, seed):
    for i, start in enumerate(range(0, n, BATCH)):
        yield min(BATCH, n - start), np.random.default_rng([seed, i])


def _check_n(n):
    if int(n) != n or n < MIN_SAMPLES:
        raise InvalidInputError(f"n must be an integer >= {MIN_SAMPLES}")
    return int(n)


def mc_win_probability(v, j, noise: NoiseModel, n, seed):
    """Empirical frequency with which noisy argmax over ``v`` returns ``j``."""
    v = as_histogram(v)
    if not 0 <= j < v.size:
        raise InvalidInputError(f"class index {j!r} out of range")
    n = _check_n(n)
    hits = 0
    for size, rng in _batches(n, seed):
        hits += int(np.count_nonzero(noisy_argmax(v, noise, size, rng) == j))
    p = hits / n
    return McEstimate(p, math.sqrt(p * (1 - p) / n), n, seed)


def mc_class_frequencies(v, noise: NoiseModel, n, seed):
    """Empirical output distribution over all classes, shape ``(m,)``."""
    v = as_histogram(v)
    n = _check_n(n)
    counts = np.zeros(v.size, dtype=np.int64)
    for size, rng in _batches(n, seed):
        counts += np.bincount(noisy_argmax(v, noise, size, rng), minlength=v.size)
    return counts / n


def posterior_table(v_minus, noise: NoiseModel, tol=DEFAULT_TOL):
    """``W[c, y] = P(output y | unknown vote went to class c)``."""
    v_minus = as_histogram(v_minus)
    m = v_minus.size
    table = np.empty((m, m))
    for c in range(m):
        v = v_minus.copy()
        v[c] += 1.0
        for y in range(m):
            table[c, y] = win_probability(v, y, noise, tol)
    return table


def mc_membership_adversary(v_minus, noise: NoiseModel, n, seed, tol=DEFAULT_TOL):
    """Simulated guessing gain of the optimal adversary for the unknown vote.

    Each round the unknown teacher's vote goes to a class drawn uniformly.
    The mechanism runs on ``v_minus`` plus that vote, and the adversary
    guesses the class by the MAP rule computed from quadrature. Returns the
    estimated ratio of its success rate to the blind rate ``1/m``. The log of
    this ratio cannot exceed the entrywise leakage (up to sampling error).
    """
    v_minus = as_histogram(v_minus)
    n = _check_n(n)
    m = v_minus.size
    if m == 1:
        return McEstimate(1.0, 0.0, n, seed)
    # MAP under a uniform prior: the class most likely to produce each output.
    guess = np.argmax(posterior_table(v_minus, noise, tol), axis=0)
    correct = 0
    for size, rng in _batches(n, seed):
        truth = rng.integers(0, m, size)
        noisy = v_minus[None, :] + noise.sample((size, m), rng)
        noisy[np.arange(size), truth] += 1.0
        y = np.argmax(noisy, axis=1)
        correct += int(np.count_nonzero(guess[y] == truth))
    rate = correct / n
    return McEstimate(m * rate, m * math.sqrt(rate * (1 - rate) / n), n, seed)
