"""Closed forms for Report-Noisy-Max with Laplace noise.

With ``q = 1 - exp(-gamma)/2`` the auxiliary series is::

    H(0) = gamma
    H(m) = H(m-1) + (2**-m - q**m) / m

It decreases to 0, so equivalently ``H(m) = sum_{k>m} (q**k - 2**-k) / k``;
the tail form has no cancellation and is used where ``m**2 * H`` matters.

For the uniform known-votes histogram the single-class win probability is
``A + B + C`` (see :func:`win_prob_uniform_closed`); the leakage is
``log(m * (A + B + C))`` because it sums that probability over all ``m``
classes. ``k(m) = m * (A + B + C)`` is concave and nondecreasing in ``m``
with limit ``exp(gamma)``, which gives the per-query bound ``gamma``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

# Powers of q switch to log space above this exponent.
_LOG_POWER_THRESHOLD = 50
# Largest tail length the vectorized tail sum will attempt.
_MAX_TAIL_TERMS = 400_000


def _check_gamma(gamma):
    gamma = float(gamma)
    if not (gamma > 0 and math.isfinite(gamma)):
        raise InvalidInputError(f"gamma must be positive, got {gamma!r}")
    return gamma


def _check_m(m, lowest):
    if int(m) != m or m < lowest:
        raise InvalidInputError(f"m must be an integer >= {lowest}, got {m!r}")
    return int(m)


def _q(gamma):
    return 1.0 - 0.5 * math.exp(-gamma)


def _qpow(gamma, k):
    if k > _LOG_POWER_THRESHOLD:
        return math.exp(k * math.log1p(-0.5 * math.exp(-gamma)))
    return _q(gamma) ** k


def _h_tail(m, gamma):
    """``H(m)`` as the positive tail sum, or ``None`` when it converges too
    slowly (very large ``gamma``)."""
    log_q = math.log1p(-0.5 * math.exp(-gamma))
    # Terms fall below 1e-18 of the first once (k - m) * |log q| > 41.5.
    n_terms = int(41.5 / -log_q) + 2
    if n_terms > _MAX_TAIL_TERMS:
        return None
    k = np.arange(m + 1, m + 1 + n_terms, dtype=float)
    terms = (np.exp(k * log_q) - np.exp(-k * math.log(2.0))) / k
    return math.fsum(terms[::-1])


def _neumaier_cumsum(start, terms):
    out = np.empty(len(terms) + 1)
    total, comp = start, 0.0
    out[0] = start
    for i, term in enumerate(terms, 1):
        t = total + term
        if abs(total) >= abs(term):
            comp += (total - t) + term
        else:
            comp += (term - t) + total
        total = t
        out[i] = total + comp
    return out


def h_series(m, gamma):
    """``[H(0), ..., H(m)]`` by the one-step recursion.

    The recursion is run downward from a tail-sum value of ``H(m)``: every
    step then adds the positive increment ``(q**k - 2**-k) / k``, so the
    result is nonnegative and nonincreasing by construction. The upward
    recursion from ``H(0) = gamma`` is used only when the tail sum is too
    long; it cancels toward zero and loses relative accuracy for large ``m``.
    Both directions use Neumaier-compensated sums.
    """
    m = _check_m(m, 0)
    gamma = _check_gamma(gamma)
    ks = range(1, m + 1)
    increments = [(2.0 ** -k - _qpow(gamma, k)) / k for k in ks]
    seed = _h_tail(m, gamma) if m else None
    if seed is None:
        return _neumaier_cumsum(gamma, increments)
    out = _neumaier_cumsum(seed, [-d for d in reversed(increments)])[::-1].copy()
    out[0] = gamma
    return out


def h_value(m, gamma):
    """``H(m)`` to high relative accuracy, for use inside the closed forms."""
    if m < 0:
        raise InvalidInputError("H is defined for m >= 0")
    if m == 0:
        return gamma
    tail = _h_tail(m, gamma)
    return tail if tail is not None else float(h_series(m, gamma)[-1])


def win_prob_uniform_closed(m, gamma):
    """Win probability of class ``j`` for histogram ``v_max + e_j``.

    ``v_max`` is any uniform known-votes histogram; the value does not depend
    on its common count. Returns::

        (1-m)/m 2^-m e^-g + (1/m) e^g (1 - q^m) + q^(m-1)/2 - (m-1)/4 e^-g H(m-2)
    """
    m = _check_m(m, 1)
    gamma = _check_gamma(gamma)
    e_neg = math.exp(-gamma)
    terms = [
        (1 - m) / m * 2.0 ** -m * e_neg,
        math.exp(gamma) * -math.expm1(m * math.log1p(-0.5 * e_neg)) / m,
        0.5 * _qpow(gamma, m - 1),
    ]
    if m >= 2:
        terms.append(-(m - 1) / 4 * e_neg * h_value(m - 2, gamma))
    return math.fsum(terms)


def _deficit(m, gamma):
    """``exp(gamma) - k(m)`` computed without subtracting near-equal values."""
    e_neg = math.exp(-gamma)
    terms = [
        math.exp(gamma) * _qpow(gamma, m),
        -0.5 * m * _qpow(gamma, m - 1),
        (m - 1) * 2.0 ** -m * e_neg,
    ]
    if m >= 2:
        terms.append(m * (m - 1) / 4 * e_neg * h_value(m - 2, gamma))
    return math.fsum(terms)


def k_of_m(m, gamma):
    """``exp`` of the leakage at the uniform histogram, ``m * (A + B + C)``."""
    m = _check_m(m, 1)
    gamma = _check_gamma(gamma)
    return math.exp(gamma) - _deficit(m, gamma)


def leakage_at_vmax(m, gamma):
    """Maximal entrywise leakage (nats) over known-votes histograms with
    ``m`` classes under Laplace noise."""
    m = _check_m(m, 1)
    gamma = _check_gamma(gamma)
    if m == 1:
        return 0.0
    d = _deficit(m, gamma)
    return gamma + math.log1p(-d * math.exp(-gamma))


def per_query_bound(gamma):
    """Worst-case entrywise leakage of one query, any ``m``: ``gamma``."""
    return _check_gamma(gamma)


def total_bound(k, gamma):
    """Leakage bound after ``k`` answered queries: ``k * gamma``."""
    if int(k) != k or k < 0:
        raise InvalidInputError(f"k must be a nonnegative integer, got {k!r}")
    return int(k) * _check_gamma(gamma)


@dataclass(frozen=True)
class AnalyticLeakage:
    gamma: float
    m: int
    h_values: tuple
    win_prob_uniform: float
    leakage_nats: float
    k_of_m: float


def analyze(m, gamma):
    """Bundle the closed-form quantities for one ``(m, gamma)`` pair."""
    m = _check_m(m, 1)
    gamma = _check_gamma(gamma)
    leak = leakage_at_vmax(m, gamma)
    return AnalyticLeakage(
        gamma=gamma,
        m=m,
        h_values=tuple(h_series(m, gamma)),
        win_prob_uniform=win_prob_uniform_closed(m, gamma),
        leakage_nats=leak,
        k_of_m=math.exp(leak),
    )
