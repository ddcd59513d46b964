"""Selfish client behaviour: pick the data size that maximizes revenue.

A client offered reward weight ``alpha`` solves::

    max_d  alpha (1 - exp(-beta d)) - theta (p d + q) / F
    s.t.   d_min <= d <= ub,   ub = min(d_max, (t_max F - q) / p)

The latency constraint is affine in ``d`` so it folds into the upper bound,
and the objective is strictly concave for ``alpha > 0``. The KKT point is
therefore the unconstrained stationary point clamped to the box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import DomainError, InfeasibleProfileError
from .models import CavProfile, ComputeModel, compute_cost, eval_reward

__all__ = [
    "Binding",
    "ClientDecision",
    "ClientFn",
    "KktClient",
    "feasible_interval",
    "client_revenue",
    "solve_data_selection",
    "oracle_grid_search",
    "respond_all",
]


class Binding(str, Enum):
    INTERIOR = "interior"
    LOWER_BOUND = "lower_bound"
    UPPER_BOUND_DATA = "upper_bound_data"
    UPPER_BOUND_LATENCY = "upper_bound_latency"


@dataclass(frozen=True)
class ClientDecision:
    d_star: float
    revenue: float
    binding: Binding


def feasible_interval(profile: CavProfile, cm: ComputeModel) -> tuple[float, float]:
    """``(d_min, ub)`` for a client; raises if the interval is empty."""
    ub = profile.upper_bound(cm)
    if not ub >= profile.d_min:
        raise InfeasibleProfileError(
            f"client {profile.id}: upper bound {ub:.6g} is below d_min {profile.d_min:.6g}"
        )
    return profile.d_min, ub


def _upper_tag(profile: CavProfile, cm: ComputeModel) -> Binding:
    if profile.d_max <= profile.latency_bound(cm):
        return Binding.UPPER_BOUND_DATA
    return Binding.UPPER_BOUND_LATENCY


def client_revenue(profile: CavProfile, cm: ComputeModel, alpha, d):
    """Reward received minus compute cost paid, in USD."""
    return eval_reward(alpha, profile.beta, d) - compute_cost(profile, cm, d)


def solve_data_selection(profile: CavProfile, cm: ComputeModel, alpha: float) -> ClientDecision:
    """Revenue-maximizing data size via the clamped stationarity condition."""
    if alpha < 0:
        raise DomainError(f"reward weight must be non-negative, got {alpha}")
    lo, ub = feasible_interval(profile, cm)
    marginal_cost = profile.theta * cm.p / profile.capacity_f
    marginal_gain = alpha * profile.beta  # marginal reward at d = 0

    if marginal_gain <= 0.0:
        # flat or decreasing revenue; ties go to the smaller size
        d_star, binding = lo, Binding.LOWER_BOUND
    elif marginal_cost == 0.0:
        d_star, binding = ub, _upper_tag(profile, cm)
    else:
        ratio = marginal_gain / marginal_cost
        d_int = math.log(ratio) / profile.beta if ratio > 1.0 else -math.inf
        if d_int <= lo:
            d_star, binding = lo, Binding.LOWER_BOUND
        elif d_int >= ub:
            d_star, binding = ub, _upper_tag(profile, cm)
        else:
            d_star, binding = d_int, Binding.INTERIOR
    return ClientDecision(float(d_star), float(client_revenue(profile, cm, alpha, d_star)), binding)


def oracle_grid_search(
    profile: CavProfile, cm: ComputeModel, alpha: float, resolution: float
) -> ClientDecision:
    """Exhaustive scan of revenue over the feasible interval.

    The grid is ``d_min, d_min + resolution, ...`` with ``ub`` appended;
    the first (smallest) best point wins.
    """
    if not resolution > 0:
        raise DomainError("resolution must be positive")
    lo, ub = feasible_interval(profile, cm)
    d_best, rev = _kernels.revenue_grid_argmax(
        float(alpha), profile.beta, profile.theta, cm.p, cm.q, profile.capacity_f, lo, ub, resolution
    )
    if d_best >= ub:
        binding = _upper_tag(profile, cm)
    elif d_best <= lo:
        binding = Binding.LOWER_BOUND
    else:
        binding = Binding.INTERIOR
    return ClientDecision(d_best, rev, binding)


ClientFn = Callable[[CavProfile, float], float]


class KktClient:
    """Default client callback: ``(profile, alpha) -> d_star``.

    ``batch`` solves every client at once with the same closed form and is
    picked up by :func:`respond_all` when present.
    """

    def __init__(self, cm: ComputeModel):
        self.cm = cm
        self._cached_profiles = None
        self._arrays = None

    def __call__(self, profile: CavProfile, alpha: float) -> float:
        return solve_data_selection(profile, self.cm, alpha).d_star

    def _profile_arrays(self, profiles: Sequence[CavProfile]):
        # identity check; the reference held here keeps the sequence alive
        if profiles is not self._cached_profiles:
            lo = np.array([feasible_interval(p, self.cm)[0] for p in profiles])
            ub = np.array([feasible_interval(p, self.cm)[1] for p in profiles])
            beta = np.array([p.beta for p in profiles])
            mc = np.array([p.theta * self.cm.p / p.capacity_f for p in profiles])
            self._arrays = (lo, ub, beta, mc)
            self._cached_profiles = profiles
        return self._arrays

    def batch(self, profiles: Sequence[CavProfile], alphas) -> np.ndarray:
        alphas = np.asarray(alphas, dtype=np.float64)
        if np.any(alphas < 0):
            raise DomainError("reward weights must be non-negative")
        lo, ub, beta, mc = self._profile_arrays(profiles)
        gain = alphas * beta
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(mc > 0, gain / np.where(mc > 0, mc, 1.0), np.inf)
            d_int = np.where(ratio > 1.0, np.log(ratio) / beta, -np.inf)
        d = np.minimum(np.maximum(d_int, lo), ub)
        return np.where(gain <= 0.0, lo, d)


def respond_all(client_fn: ClientFn, profiles: Sequence[CavProfile], alphas) -> np.ndarray:
    """Query every client in index order and collect their data sizes."""
    batch = getattr(client_fn, "batch", None)
    if batch is not None:
        return np.asarray(batch(profiles, alphas), dtype=np.float64)
    return np.array([float(client_fn(p, float(a))) for p, a in zip(profiles, alphas)])
