"""Finite channels and their pointwise conditional maximal leakage.

A :class:`ConditionalChannel` is ``P(y | x, z)`` for one fixed outcome ``z`` of
the adversary's side information, restricted to the inputs ``x`` that are
still possible given ``z``. Its leakage is::

    log sum_y max_{x in support} P(y | x, z)

When ``Z - X - Y`` is a Markov chain the same ``P(y | x)`` table serves every
``z``; only the support changes (see :meth:`ConditionalChannel.restrict`).
"""

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError

ROW_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ConditionalChannel:
    """Row-stochastic table indexed by ``x_support`` x ``y_alphabet``."""

    x_support: tuple
    y_alphabet: tuple
    table: np.ndarray

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "x_support", tuple(self.x_support))
        object.__setattr__(self, "y_alphabet", tuple(self.y_alphabet))
        if not self.x_support:
            raise InvalidInputError("x_support must be nonempty")
        if table.shape != (len(self.x_support), len(self.y_alphabet)):
            raise InvalidInputError(
                f"table shape {table.shape} does not match "
                f"{len(self.x_support)} inputs x {len(self.y_alphabet)} outputs"
            )
        if len(set(self.x_support)) != len(self.x_support):
            raise InvalidInputError("x_support labels must be distinct")
        if len(set(self.y_alphabet)) != len(self.y_alphabet):
            raise InvalidInputError("y_alphabet labels must be distinct")
        if np.any(table < 0) or np.any(table > 1):
            raise InvalidInputError("probabilities must lie in [0, 1]")
        if np.any(np.abs(table.sum(axis=1) - 1.0) > ROW_TOL):
            raise InvalidInputError("each row must sum to 1")

    @classmethod
    def from_matrix(cls, matrix, x_labels=None, y_labels=None):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2:
            raise InvalidInputError("channel matrix must be 2-D")
        nx, ny = matrix.shape
        return cls(
            tuple(x_labels) if x_labels is not None else tuple(range(nx)),
            tuple(y_labels) if y_labels is not None else tuple(range(ny)),
            matrix,
        )

    @classmethod
    def from_json(cls, data):
        """Parse ``{"x_support": [...], "y_alphabet": [...], "rows": {x: [...]}}``.

        ``data`` may be a ``dict`` or a JSON string.
        """
        if isinstance(data, str):
            data = json.loads(data)
        try:
            xs, ys, rows = data["x_support"], data["y_alphabet"], data["rows"]
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"channel JSON missing field {exc}") from None
        missing = [x for x in xs if x not in rows]
        if missing:
            raise InvalidInputError(f"no row given for inputs {missing}")
        extra = [x for x in rows if x not in xs]
        if extra:
            raise InvalidInputError(f"rows given for inputs outside x_support: {extra}")
        return cls(tuple(xs), tuple(ys), np.array([rows[x] for x in xs], dtype=float))

    def to_json(self):
        return {
            "x_support": list(self.x_support),
            "y_alphabet": list(self.y_alphabet),
            "rows": {x: self.table[i].tolist() for i, x in enumerate(self.x_support)},
        }

    def restrict(self, support: Sequence):
        """Same ``P(y | x)`` on a smaller input support."""
        index = {x: i for i, x in enumerate(self.x_support)}
        try:
            rows = [index[x] for x in support]
        except KeyError as exc:
            raise InvalidInputError(f"{exc} is not in x_support") from None
        return ConditionalChannel(tuple(support), self.y_alphabet, self.table[rows])


def pcml(channel: ConditionalChannel):
    """Pointwise conditional maximal leakage in nats."""
    return math.log(math.fsum(channel.table.max(axis=0)))


def maximal_leakage(channel: ConditionalChannel):
    """Unconditional maximal leakage: :func:`pcml` with the support taken to
    be every input of positive marginal probability."""
    return pcml(channel)


def _as_distribution(p, n, what):
    p = np.asarray(p, dtype=float)
    if p.shape != (n,) or np.any(p < 0) or abs(p.sum() - 1.0) > ROW_TOL:
        raise InvalidInputError(f"{what} must be a probability vector of length {n}")
    return p


def map_adversary_gain(channel: ConditionalChannel, prior, u_given_x):
    """Success ratio of the MAP guess of ``U`` with and without seeing ``Y``.

    ``U`` depends on the output only through ``x``, so the joint law is
    ``P(u, x, y) = P(x) P(u | x) P(y | x)``.

    Parameters
    ----------
    prior : array_like, shape (n_x,)
        ``P(x | z)`` over ``channel.x_support``; must be strictly positive.
    u_given_x : array_like, shape (n_x, n_u)
        Row-stochastic ``P(u | x)``.

    Returns
    -------
    float
        ``sum_y max_u P(u, y) / max_u P(u)``; its log never exceeds
        ``pcml(channel)``.
    """
    nx = len(channel.x_support)
    prior = _as_distribution(prior, nx, "prior")
    if np.any(prior <= 0):
        raise InvalidInputError("prior must be strictly positive on x_support")
    u_given_x = np.asarray(u_given_x, dtype=float)
    if u_given_x.ndim != 2 or u_given_x.shape[0] != nx:
        raise InvalidInputError("u_given_x must have one row per input")
    if np.any(u_given_x < 0) or np.any(np.abs(u_given_x.sum(axis=1) - 1) > ROW_TOL):
        raise InvalidInputError("u_given_x rows must be probability vectors")
    joint_ux = prior[:, None] * u_given_x            # (x, u)
    joint_uy = joint_ux.T @ channel.table            # (u, y)
    blind = joint_ux.sum(axis=0).max()
    informed = math.fsum(joint_uy.max(axis=0))
    return informed / blind


def shattering_adversary(channel: ConditionalChannel):
    """Prior and ``P(u | x)`` attaining the leakage: ``U`` uniform, ``X = U``."""
    nx = len(channel.x_support)
    return np.full(nx, 1.0 / nx), np.eye(nx)


def product_channel(c1: ConditionalChannel, c2: ConditionalChannel):
    """Joint channel to ``(y1, y2)`` with outputs independent given ``x``."""
    if c1.x_support != c2.x_support:
        raise InvalidInputError("channels must share x_support")
    table = (c1.table[:, :, None] * c2.table[:, None, :]).reshape(len(c1.x_support), -1)
    ys = tuple((a, b) for a in c1.y_alphabet for b in c2.y_alphabet)
    return ConditionalChannel(c1.x_support, ys, table)


def postprocess(channel: ConditionalChannel, kernel, y2_alphabet=None):
    """Compose with a row-stochastic kernel ``P(y2 | y)``."""
    kernel = np.asarray(kernel, dtype=float)
    if kernel.ndim != 2 or kernel.shape[0] != len(channel.y_alphabet):
        raise InvalidInputError("kernel must have one row per output symbol")
    if np.any(kernel < 0) or np.any(np.abs(kernel.sum(axis=1) - 1) > ROW_TOL):
        raise InvalidInputError("kernel rows must be probability vectors")
    ys = tuple(y2_alphabet) if y2_alphabet is not None else tuple(range(kernel.shape[1]))
    table = channel.table @ kernel
    # Matrix products can drift a few ulps off the simplex.
    table = np.clip(table, 0.0, 1.0)
    table /= table.sum(axis=1, keepdims=True)
    return ConditionalChannel(channel.x_support, ys, table)


def kernel_as_channel(channel: ConditionalChannel, kernel):
    """The kernel ``P(y2 | y)`` as a channel from the outputs ``channel`` can
    actually produce."""
    reachable = np.flatnonzero(channel.table.max(axis=0) > 0)
    kernel = np.asarray(kernel, dtype=float)
    return ConditionalChannel(
        tuple(channel.y_alphabet[i] for i in reachable),
        tuple(range(kernel.shape[1])),
        kernel[reachable],
    )


def deterministic_channel(mapping, x_support, y_alphabet):
    """0/1 channel sending each ``x`` to ``mapping[x]``."""
    col = {y: i for i, y in enumerate(y_alphabet)}
    table = np.zeros((len(x_support), len(y_alphabet)))
    for i, x in enumerate(x_support):
        table[i, col[mapping[x]]] = 1.0
    return ConditionalChannel(tuple(x_support), tuple(y_alphabet), table)


def random_channel(n_x, n_y, rng):
    """Rows of independent uniform draws, normalized."""
    rng = np.random.default_rng(rng)
    raw = rng.random((n_x, n_y))
    return ConditionalChannel.from_matrix(raw / raw.sum(axis=1, keepdims=True))
