"""Exact Gaussian process regression with an RBF kernel.

Used twice: per client to learn the reward-to-data-size response, and by
the Bayesian-optimization baseline over the joint reward-weight space.

When hyperparameters are tuned automatically, inputs are rescaled to
[0, 1] by the training min/max and targets are standardized, so one
hyperparameter grid serves both the scalar and the multi-dimensional case.
A fixed kernel is applied in the caller's units with no rescaling. Either
way the prior mean is the mean of the training targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from . import _kernels
from .errors import GPRFitError, NotFittedError

__all__ = [
    "Kernel",
    "GprConfig",
    "GprModel",
    "fit",
    "predict",
    "predict_many",
    "log_marginal_likelihood",
    "sample_posterior",
]

MIN_NOISE = 1e-8
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Kernel:
    """Squared-exponential covariance plus white noise."""

    signal_variance: float = 1.0
    length_scale: float = 1.0
    noise_variance: float = 1e-6
    variant: str = "rbf"

    def __post_init__(self):
        if self.variant != "rbf":
            raise ValueError(f"unsupported kernel variant {self.variant!r}")
        if not self.length_scale > 0:
            raise ValueError("length_scale must be positive")
        if not self.signal_variance > 0:
            raise ValueError("signal_variance must be positive")
        if not self.noise_variance >= MIN_NOISE:
            raise ValueError(f"noise_variance must be >= {MIN_NOISE}")

    def cov(self, sqd):
        return self.signal_variance * np.exp(-0.5 * sqd / (self.length_scale**2))


@dataclass(frozen=True)
class GprConfig:
    """How :func:`fit` picks its kernel.

    With ``kernel=None`` the length scale and signal variance are chosen by
    maximizing the log marginal likelihood over a log-spaced grid spanning
    0.1x to 10x the (normalized) input range and output variance. ``noise``
    is then the noise variance relative to the output variance.
    """

    kernel: Kernel | None = None
    noise: float = 1e-6
    length_scale_points: int = 7
    signal_points: int = 5
    jitter0: float = 1e-8
    jitter_max: float = 1e-2


@dataclass(frozen=True, eq=False)
class GprModel:
    kernel: Kernel
    xs: np.ndarray
    ys: np.ndarray
    x_offset: np.ndarray
    x_scale: np.ndarray
    y_mean: float
    y_scale: float
    chol: np.ndarray
    alpha_vec: np.ndarray
    jitter: float = 0.0
    _xw: np.ndarray = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.ys.shape[0]

    @property
    def dim(self) -> int:
        return self.xs.shape[1]


def _as_2d(xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim == 0:
        return xs.reshape(1, 1)
    if xs.ndim == 1:
        return xs.reshape(-1, 1)
    return xs


def fit(xs, ys, config: GprConfig | None = None) -> GprModel:
    """Fit a GP to inputs ``xs`` (shape ``(n,)`` or ``(n, k)``) and targets ``ys``."""
    config = config or GprConfig()
    x = _as_2d(xs)
    y = np.asarray(ys, dtype=np.float64).reshape(-1)
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"got {x.shape[0]} inputs but {y.shape[0]} targets")
    if y.shape[0] < 1:
        raise ValueError("need at least one training point")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("training data must be finite")

    y_mean = float(np.mean(y))
    if config.kernel is None:
        lo = x.min(axis=0)
        span = x.max(axis=0) - lo
        x_scale = np.where(span > 0, span, 1.0)
        x_offset = lo
        y_std = float(np.std(y))
        y_scale = y_std if y_std > 1e-12 * max(1.0, abs(y_mean)) else 1.0
    else:
        x_offset = np.zeros(x.shape[1])
        x_scale = np.ones(x.shape[1])
        y_scale = 1.0
    xw = (x - x_offset) / x_scale
    yw = (y - y_mean) / y_scale
    sqd = _kernels.sq_dists(xw, xw)

    if config.kernel is None:
        ls_grid = np.logspace(-1.0, 1.0, config.length_scale_points)
        sv_grid = np.logspace(-1.0, 1.0, config.signal_points)
        noise = max(config.noise, MIN_NOISE)
        lml = _kernels.lml_grid(sqd, yw, ls_grid, sv_grid, noise, config.jitter0, config.jitter_max)
        if not np.any(np.isfinite(lml)):
            raise GPRFitError("no hyperparameter setting gave a valid factorization")
        # first maximum in row-major order breaks ties deterministically
        i, j = np.unravel_index(int(np.argmax(lml)), lml.shape)
        kernel = Kernel(
            signal_variance=float(sv_grid[j]), length_scale=float(ls_grid[i]), noise_variance=noise
        )
    else:
        kernel = config.kernel

    kmat = kernel.cov(sqd)
    kmat[np.diag_indices_from(kmat)] += kernel.noise_variance
    try:
        chol, jitter = _kernels.cholesky_jitter(kmat, config.jitter0, config.jitter_max)
    except np.linalg.LinAlgError as exc:
        raise GPRFitError(f"covariance factorization failed for n={y.shape[0]}") from exc
    alpha_vec = cho_solve((chol, True), yw, check_finite=False)
    return GprModel(
        kernel=kernel,
        xs=x,
        ys=y,
        x_offset=x_offset,
        x_scale=x_scale,
        y_mean=y_mean,
        y_scale=y_scale,
        chol=chol,
        alpha_vec=alpha_vec,
        jitter=jitter,
        _xw=xw,
    )


def predict_many(model: GprModel, xq):
    """Posterior mean and latent standard deviation at each row of ``xq``."""
    if model is None:
        raise NotFittedError("surrogate has not been fitted")
    xq = np.asarray(xq, dtype=np.float64)
    if xq.ndim < 2:
        xq = xq.reshape(-1, model.dim)
    xw = (xq - model.x_offset) / model.x_scale
    kern = model.kernel
    ks = kern.cov(_kernels.sq_dists(xw, model._xw))
    mean = ks @ model.alpha_vec
    v = solve_triangular(model.chol, ks.T, lower=True, check_finite=False)
    var = kern.signal_variance - np.einsum("ij,ij->j", v, v)
    std = np.sqrt(np.maximum(var, 0.0))
    return model.y_mean + model.y_scale * mean, model.y_scale * std


def predict(model: GprModel, x):
    """Posterior ``(mean, std)`` at a single input.

    ``std`` is the latent-function uncertainty; observation noise is not added.
    """
    if model is None:
        raise NotFittedError("surrogate has not been fitted")
    mean, std = predict_many(model, np.asarray(x, dtype=np.float64).reshape(1, model.dim))
    return float(mean[0]), float(std[0])


def log_marginal_likelihood(model: GprModel) -> float:
    """Log density of the training targets under the fitted GP, in target units."""
    if model is None:
        raise NotFittedError("surrogate has not been fitted")
    yw = (model.ys - model.y_mean) / model.y_scale
    z = solve_triangular(model.chol, yw, lower=True, check_finite=False)
    n = model.n
    return (
        -0.5 * float(z @ z)
        - float(np.sum(np.log(np.diag(model.chol))))
        - 0.5 * n * _LOG_2PI
        - n * math.log(model.y_scale)
    )


def sample_posterior(model: GprModel, x, rng: np.random.Generator) -> float:
    """One draw from the predictive normal at ``x``; consumes exactly one variate."""
    mean, std = predict(model, x)
    return mean + std * float(rng.standard_normal())
