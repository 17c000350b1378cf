"""Majorization order on histograms and the extremal histograms it implies.

``p`` majorizes ``q`` when both have the same total and every prefix sum of
``p`` sorted descending is at least the matching prefix sum of ``q``.
Leakage of Report-Noisy-Max under log-concave noise reverses this order, so
the flattest histogram leaks most and the concentrated ones least.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ResourceError

SLACK = 1e-9
ENUMERATION_CAP = 100_000

P_MAJORIZES_Q = "p_majorizes_q"
Q_MAJORIZES_P = "q_majorizes_p"
EQUAL = "equal"
INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class MajorizationVerdict:
    relation: str
    prefix_sums_p: tuple
    prefix_sums_q: tuple


def compare(p, q, slack=SLACK):
    """Classify the majorization relation between ``p`` and ``q``."""
    p = np.sort(np.asarray(p, dtype=float))[::-1]
    q = np.sort(np.asarray(q, dtype=float))[::-1]
    if p.ndim != 1 or p.shape != q.shape or p.size == 0:
        raise InvalidInputError("p and q must be nonempty and of equal length")
    cp, cq = np.cumsum(p), np.cumsum(q)
    sums = (tuple(cp.tolist()), tuple(cq.tolist()))
    if abs(cp[-1] - cq[-1]) > slack:
        return MajorizationVerdict(INCOMPARABLE, *sums)
    if np.all(np.abs(p - q) <= slack):
        return MajorizationVerdict(EQUAL, *sums)
    if np.all(cp >= cq - slack):
        return MajorizationVerdict(P_MAJORIZES_Q, *sums)
    if np.all(cq >= cp - slack):
        return MajorizationVerdict(Q_MAJORIZES_P, *sums)
    return MajorizationVerdict(INCOMPARABLE, *sums)


def majorizes(p, q, slack=SLACK):
    """True if ``p`` majorizes ``q`` (including equality up to order)."""
    return compare(p, q, slack).relation in (P_MAJORIZES_Q, EQUAL)


def extremal_histograms(total, m):
    """Return ``(v_max, v_min_family)`` for histograms with the given total.

    ``v_max`` spreads ``total`` evenly (possibly non-integer); ``v_min_family``
    holds the ``m`` histograms putting everything in a single class.
    """
    if int(m) != m or m < 1:
        raise InvalidInputError("m must be a positive integer")
    if not total >= 0:
        raise InvalidInputError("total must be nonnegative")
    m = int(m)
    v_max = tuple([total / m] * m)
    v_min = []
    for j in range(m):
        v = [0.0] * m
        v[j] = float(total)
        v_min.append(tuple(v))
    return v_max, v_min


def most_balanced(total, m):
    """Integer histogram whose counts differ by at most one.

    Larger counts come first. This is the integer stand-in for the uniform
    maximizer when ``total`` is not divisible by ``m``.
    """
    if int(total) != total or total < 0 or int(m) != m or m < 1:
        raise InvalidInputError("total and m must be integers, total >= 0, m >= 1")
    base, extra = divmod(int(total), int(m))
    return tuple([base + 1] * extra + [base] * (int(m) - extra))


def enumerate_histograms(total, m, cap=ENUMERATION_CAP):
    """All compositions of ``total`` into ``m`` nonnegative integer parts.

    Order is lexicographically descending in the first count, e.g.
    ``(2, 0), (1, 1), (0, 2)``.

    Raises
    ------
    ResourceError
        If the number of compositions exceeds ``cap``.
    """
    if int(total) != total or total < 0 or int(m) != m or m < 1:
        raise InvalidInputError("total and m must be integers, total >= 0, m >= 1")
    total, m = int(total), int(m)
    count = math.comb(total + m - 1, m - 1)
    if count > cap:
        raise ResourceError(f"{count} histograms exceed the enumeration cap of {cap}")
    out = []
    # Stars and bars: choose m-1 bar positions among total+m-1 slots.
    for bars in itertools.combinations(range(total + m - 1), m - 1):
        edges = (-1,) + bars + (total + m - 1,)
        out.append(tuple(edges[i + 1] - edges[i] - 1 for i in range(m)))
    out.reverse()
    return out
