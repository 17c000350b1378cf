"""Univariate noise distributions added to each histogram bin.

A :class:`NoiseModel` bundles vectorized density, CDF and quantile functions
plus the locations of any kinks (points where the density is not smooth),
which the quadrature engine uses as panel edges.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

from .errors import InvalidInputError

TAIL_EPS = 1e-13

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class NoiseModel:
    """Immutable zero-location noise distribution.

    Attributes
    ----------
    kind : str
        ``"laplace"``, ``"gaussian"`` or ``"custom"``.
    scale : float
        Laplace scale ``b = 1/gamma`` or Gaussian standard deviation. For
        custom models this is informational only.
    density, cumulative, quantile : callable
        Vectorized maps over ``ndarray``.
    log_concave : bool
        Attestation that the density is log-concave. Shortcuts that rely on
        Schur-concavity are only valid when this is true.
    kinks : tuple of float
        Points where the density or CDF is not smooth.
    """

    kind: str
    scale: float
    density: ArrayFn = field(repr=False, compare=False)
    cumulative: ArrayFn = field(repr=False, compare=False)
    quantile: ArrayFn = field(repr=False, compare=False)
    log_concave: bool = False
    kinks: tuple = ()

    @property
    def gamma(self):
        if self.kind != "laplace":
            raise AttributeError("gamma is defined for Laplace noise only")
        return 1.0 / self.scale

    def support_bounds(self, eps=TAIL_EPS):
        """Truncation interval leaving at most ``eps`` mass in each tail."""
        lo = float(self.quantile(np.array([eps]))[0])
        hi = float(self.quantile(np.array([1.0 - eps]))[0])
        return lo, hi

    def sample(self, size, rng):
        """Inverse-CDF draws. ``rng`` is a seed or ``numpy.random.Generator``."""
        rng = np.random.default_rng(rng)
        u = rng.random(size)
        # Generator.random is on [0, 1); keep quantile away from -inf.
        u = np.clip(u, np.finfo(float).tiny, None)
        return self.quantile(u)

    def to_config(self):
        if self.kind == "laplace":
            return {"kind": "laplace", "gamma": self.gamma}
        if self.kind == "gaussian":
            return {"kind": "gaussian", "sigma": self.scale}
        raise InvalidInputError("custom noise models have no config form")


def laplace_model(gamma):
    """Laplace noise with location 0 and scale ``1/gamma``.

    Smaller ``gamma`` means larger noise.
    """
    gamma = float(gamma)
    if not (gamma > 0 and np.isfinite(gamma)):
        raise InvalidInputError(f"gamma must be positive, got {gamma!r}")

    def density(t):
        t = np.asarray(t, dtype=float)
        return 0.5 * gamma * np.exp(-gamma * np.abs(t))

    def cumulative(t):
        t = np.asarray(t, dtype=float)
        half_tail = 0.5 * np.exp(-gamma * np.abs(t))
        return np.where(t < 0, half_tail, 1.0 - half_tail)

    def quantile(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            lower = np.log(2.0 * u) / gamma
            upper = -np.log(2.0 * (1.0 - u)) / gamma
        return np.where(u < 0.5, lower, upper)

    return NoiseModel(
        kind="laplace",
        scale=1.0 / gamma,
        density=density,
        cumulative=cumulative,
        quantile=quantile,
        log_concave=True,
        kinks=(0.0,),
    )


def gaussian_model(sigma):
    """Zero-mean Gaussian noise with standard deviation ``sigma``."""
    sigma = float(sigma)
    if not (sigma > 0 and np.isfinite(sigma)):
        raise InvalidInputError(f"sigma must be positive, got {sigma!r}")
    norm = 1.0 / (sigma * np.sqrt(2.0 * np.pi))

    def density(t):
        z = np.asarray(t, dtype=float) / sigma
        return norm * np.exp(-0.5 * z * z)

    def cumulative(t):
        return special.ndtr(np.asarray(t, dtype=float) / sigma)

    def quantile(u):
        return sigma * special.ndtri(np.asarray(u, dtype=float))

    return NoiseModel(
        kind="gaussian",
        scale=sigma,
        density=density,
        cumulative=cumulative,
        quantile=quantile,
        log_concave=True,
    )


def custom_model(density, cumulative, quantile, kinks: Sequence[float] = (),
                 log_concave=False, scale=1.0):
    """Wrap user-supplied vectorized functions as a :class:`NoiseModel`.

    ``log_concave`` defaults to unattested; pass ``True`` only if the density
    is known to be log-concave (see :func:`log_concavity_probe`).
    """
    for name, fn in (("density", density), ("cumulative", cumulative),
                     ("quantile", quantile)):
        if not callable(fn):
            raise InvalidInputError(f"{name} must be callable")
    return NoiseModel(
        kind="custom",
        scale=float(scale),
        density=density,
        cumulative=cumulative,
        quantile=quantile,
        log_concave=bool(log_concave),
        kinks=tuple(float(k) for k in kinks),
    )


def noise_from_config(config):
    """Build a model from ``{"kind": "laplace", "gamma": ...}`` or
    ``{"kind": "gaussian", "sigma": ...}``."""
    if not isinstance(config, dict) or "kind" not in config:
        raise InvalidInputError("noise config must be an object with a 'kind' key")
    kind = config["kind"]
    try:
        if kind == "laplace":
            return laplace_model(config["gamma"])
        if kind == "gaussian":
            return gaussian_model(config["sigma"])
    except KeyError as exc:
        raise InvalidInputError(f"noise config for {kind!r} is missing {exc}") from None
    raise InvalidInputError(f"unknown noise kind {kind!r}")


def log_concavity_probe(model: NoiseModel, grid, delta, slack=1e-12,
                        functions: Optional[Sequence[str]] = None):
    """Check ``f(x1 + delta) f(x2) >= f(x1) f(x2 + delta)`` on all grid pairs.

    The inequality characterizes log-concavity for ``x1 <= x2``. It is
    checked for both the density and the CDF unless ``functions`` narrows
    it to one of ``"density"`` / ``"cumulative"``.
    """
    x = np.asarray(grid, dtype=float)
    if x.size == 0:
        raise InvalidInputError("grid must be nonempty")
    if np.any(np.diff(x) < 0):
        raise InvalidInputError("grid must be sorted ascending")
    if not delta > 0:
        raise InvalidInputError("delta must be positive")

    i, j = np.triu_indices(x.size)
    x1, x2 = x[i], x[j]
    names = functions or ("density", "cumulative")
    for name in names:
        f = getattr(model, name)
        lhs = f(x1 + delta) * f(x2)
        rhs = f(x1) * f(x2 + delta)
        if np.any(lhs < rhs - slack):
            return False
    return True
