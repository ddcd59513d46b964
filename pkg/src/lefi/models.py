"""Closed-form domain models: accuracy, reward, compute load and client cost.

Units used throughout the package:

* data size ``d`` in kilo-samples (the per-client cap of 10K entries is ``d=10``)
* reward weights and payouts in USD
* compute load in TFLOPs, capacity in TFLOPS, time in seconds
* ``theta`` in USD per second of compute

All functions accept scalars or numpy arrays and broadcast elementwise.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "AccuracyModel",
    "ComputeModel",
    "CavProfile",
    "eval_accuracy",
    "accuracy_grad_d",
    "eval_reward",
    "compute_flops",
    "compute_time",
    "compute_cost",
    "total_payout",
    "total_accuracy",
]


@dataclass(frozen=True)
class AccuracyModel:
    """Second-order polynomial ``A(d, pi)`` fitted on CIFAR-10 profiling.

    ``A = a d^2 + b pi^2 + c d pi + d_coef d + e pi + f``; the field ``d``
    is the linear data-size coefficient, not a data size.
    """

    a: float = -0.000152
    b: float = 0.071
    c: float = -0.00117
    d: float = 0.0151
    e: float = 0.011
    f: float = 0.073

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ComputeModel:
    """Affine compute load ``C(d) = p d + q`` in TFLOPs."""

    p: float = 79.1259
    q: float = 17.6219

    def __post_init__(self):
        # p == 0 is allowed for degenerate test models
        if self.p < 0:
            raise DomainError(f"p must be non-negative, got {self.p}")
        if self.q < 0:
            raise DomainError(f"q must be non-negative, got {self.q}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CavProfile:
    """Private parameters of one client vehicle."""

    id: int
    beta: float
    theta: float
    capacity_f: float
    pi: float
    d_min: float = 0.0
    d_max: float = 10.0
    t_max: float = 200.0

    def __post_init__(self):
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if self.theta < 0:
            raise DomainError(f"theta must be non-negative, got {self.theta}")
        if not self.capacity_f > 0:
            raise DomainError(f"capacity_f must be positive, got {self.capacity_f}")
        if not 0.0 <= self.pi <= 1.0:
            raise DomainError(f"pi must lie in [0, 1], got {self.pi}")
        if not 0.0 <= self.d_min <= self.d_max:
            raise DomainError(f"need 0 <= d_min <= d_max, got {self.d_min}, {self.d_max}")
        if not self.t_max > 0:
            raise DomainError(f"t_max must be positive, got {self.t_max}")

    def latency_bound(self, cm: ComputeModel) -> float:
        """Largest data size whose compute time fits in ``t_max``."""
        if cm.p == 0:
            return np.inf if cm.q <= self.t_max * self.capacity_f else -np.inf
        return (self.t_max * self.capacity_f - cm.q) / cm.p

    def upper_bound(self, cm: ComputeModel) -> float:
        return min(self.d_max, self.latency_bound(cm))

    def to_dict(self) -> dict:
        return asdict(self)


def _check_accuracy_domain(d, pi):
    if np.any(np.asarray(d) < 0):
        raise DomainError("data size must be non-negative")
    pi = np.asarray(pi)
    if np.any((pi < 0) | (pi > 1)):
        raise DomainError("non-IID severity must lie in [0, 1]")


def eval_accuracy(m: AccuracyModel, d, pi):
    """Accuracy fraction of one client, unclamped."""
    _check_accuracy_domain(d, pi)
    d = np.asarray(d, dtype=float)
    pi = np.asarray(pi, dtype=float)
    out = m.a * d * d + m.b * pi * pi + m.c * d * pi + m.d * d + m.e * pi + m.f
    return out[()] if out.ndim == 0 else out


def accuracy_grad_d(m: AccuracyModel, d, pi):
    """Partial derivative of :func:`eval_accuracy` with respect to ``d``."""
    _check_accuracy_domain(d, pi)
    d = np.asarray(d, dtype=float)
    pi = np.asarray(pi, dtype=float)
    out = 2.0 * m.a * d + m.c * pi + m.d
    return out[()] if out.ndim == 0 else out


def eval_reward(alpha, beta, d):
    """Saturating reward ``alpha (1 - exp(-beta d))`` paid for ``d`` kilo-samples."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    d = np.asarray(d, dtype=float)
    if np.any(alpha < 0) or np.any(beta < 0) or np.any(d < 0):
        raise DomainError("reward inputs must be non-negative")
    out = alpha * -np.expm1(-beta * d)
    return out[()] if out.ndim == 0 else out


def compute_flops(cm: ComputeModel, d):
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise DomainError("data size must be non-negative")
    out = cm.p * d + cm.q
    return out[()] if out.ndim == 0 else out


def compute_time(cm: ComputeModel, d, capacity_f):
    capacity_f = np.asarray(capacity_f, dtype=float)
    if np.any(capacity_f <= 0):
        raise DomainError("compute capacity must be positive")
    out = compute_flops(cm, d) / capacity_f
    return out[()] if np.ndim(out) == 0 else out


def compute_cost(profile: CavProfile, cm: ComputeModel, d):
    """Monetary cost of training on ``d`` kilo-samples: theta times compute seconds."""
    return profile.theta * compute_time(cm, d, profile.capacity_f)


def total_payout(alpha, profiles, sizes) -> float:
    """Sum of rewards owed to all clients at the given data sizes."""
    alpha = np.asarray(alpha, dtype=float)
    sizes = np.asarray(sizes, dtype=float)
    if not (alpha.shape == sizes.shape == (len(profiles),)):
        raise DomainError(
            f"length mismatch: {alpha.shape[0] if alpha.ndim else 1} weights, "
            f"{len(profiles)} profiles, {sizes.shape[0] if sizes.ndim else 1} sizes"
        )
    beta = np.array([pr.beta for pr in profiles], dtype=float)
    return float(np.sum(eval_reward(alpha, beta, sizes)))


def total_accuracy(m: AccuracyModel, sizes, pis, clamp: bool = False) -> float:
    """Server objective: sum of per-client accuracies.

    ``clamp`` clips each term to [0, 1]; it is meant for reporting only.
    """
    acc = np.atleast_1d(eval_accuracy(m, sizes, pis))
    if clamp:
        acc = np.clip(acc, 0.0, 1.0)
    return float(np.sum(acc))
