"""Win probabilities and entrywise leakage of Report-Noisy-Max.

Classes are indexed from 0. A vote histogram is any 1-D sequence of
nonnegative reals; integer counts are the common case but real-valued
histograms are accepted.

The probability that class ``j`` wins under i.i.d. noise with density ``g``
and CDF ``G`` is::

    P(j | v) = ∫ prod_{l != j} G(v_j - v_l + t) g(t) dt

The entrywise leakage about the one vote the adversary does not know, given
the known-votes histogram ``v_minus``, is ``log sum_j P(j | v_minus + e_j)``.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidInputError
from .noise import NoiseModel
from .quadrature import integrate

DEFAULT_TOL = 1e-10


def as_histogram(v):
    """Validate and return ``v`` as a float ``ndarray``."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise InvalidInputError("histogram must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("histogram counts must be finite")
    if np.any(arr < 0):
        raise InvalidInputError("histogram counts must be nonnegative")
    return arr


@dataclass
class LeakageReport:
    """Leakage in nats plus how it was obtained.

    ``error_estimate`` bounds the absolute error of ``value_nats``.
    """

    value_nats: float
    method: str
    per_class_win_probs: tuple = ()
    error_estimate: float = 0.0
    parameters: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["per_class_win_probs"] = list(self.per_class_win_probs)
        return d


def _breakpoints(v, j, noise: NoiseModel, lo, hi):
    """Panel edges: truncation ends plus every kink of every factor.

    Smooth models still get edges where each CDF factor is centred, which
    is where the integrand changes fastest.
    """
    pts = [lo, hi]
    for k in noise.kinks or (0.0,):
        pts.append(k)
        pts.extend(v[l] - v[j] + k for l in range(v.size) if l != j)
    return sorted(p for p in pts if lo <= p <= hi)


def win_probability_detail(v, j, noise: NoiseModel, tol=DEFAULT_TOL):
    """Like :func:`win_probability` but returns ``(probability, error)``."""
    v = as_histogram(v)
    m = v.size
    if not (0 <= j < m) or int(j) != j:
        raise InvalidInputError(f"class index {j!r} out of range for m={m}")
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    j = int(j)
    if m == 1:
        return 1.0, 0.0

    offsets = v[j] - np.delete(v, j)

    def integrand(t):
        out = noise.density(t)
        for c in offsets:
            out = out * noise.cumulative(t + c)
        return out

    lo, hi = noise.support_bounds()
    res = integrate(integrand, _breakpoints(v, j, noise, lo, hi), tol=tol)
    return min(max(res.value, 0.0), 1.0), res.error


def win_probability(v, j, noise: NoiseModel, tol=DEFAULT_TOL):
    """Probability that noisy argmax over ``v`` returns class ``j``.

    Raises
    ------
    InvalidInputError
        If ``j`` is not a valid class index.
    AccuracyError
        If quadrature cannot reach ``tol``.
    """
    return win_probability_detail(v, j, noise, tol)[0]


def entrywise_leakage(v_minus, noise: NoiseModel, tol=DEFAULT_TOL):
    """Leakage about the unknown vote given the known-votes histogram.

    Parameters
    ----------
    v_minus : sequence of float
        Histogram of the votes known to the adversary.
    noise : NoiseModel
    tol : float
        Absolute tolerance for each win probability.

    Returns
    -------
    LeakageReport
        ``method == "quadrature"``; ``per_class_win_probs[j]`` is the win
        probability of class ``j`` after adding one vote to class ``j``.
    """
    v_minus = as_histogram(v_minus)
    m = v_minus.size
    probs, errs = [], []
    for j in range(m):
        v = v_minus.copy()
        v[j] += 1.0
        p, e = win_probability_detail(v, j, noise, tol)
        probs.append(p)
        errs.append(e)
    total = math.fsum(probs)
    # Each term dominates P(j | v_minus), which sum to 1, so the true total
    # is >= 1; clamping only removes truncation/rounding below zero.
    value = max(math.log(total), 0.0) if total > 0 else 0.0
    params = {"m": m, "tol": tol, "noise": noise.kind, "scale": noise.scale}
    return LeakageReport(
        value_nats=value,
        method="quadrature",
        per_class_win_probs=tuple(probs),
        error_estimate=math.fsum(errs) / max(total, 1.0),
        parameters=params,
    )


def noisy_argmax(v, noise: NoiseModel, size, rng):
    """``size`` independent mechanism outputs for histogram ``v``.

    Ties (probability zero) go to the lowest class index.
    """
    v = as_histogram(v)
    rng = np.random.default_rng(rng)
    noisy = v[None, :] + noise.sample((int(size), v.size), rng)
    return np.argmax(noisy, axis=1)


def noisy_argmax_sample(v, noise: NoiseModel, seed: Optional[int]):
    """One Report-Noisy-Max output, deterministic given ``seed``."""
    return int(noisy_argmax(v, noise, 1, seed)[0])
