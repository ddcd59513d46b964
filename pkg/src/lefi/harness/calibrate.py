"""Choosing the global cost-scale knob.

Clients pinned at their data cap give the server nothing to learn, while
an overpriced population trains on almost nothing. The knob is set to the
smallest multiplier at which the median client, offered the initial
uniform weight, lands strictly inside its feasible interval, i.e. the
cheapest compute price that still leaves a typical response curve live.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable

import numpy as np

from ..client import KktClient
from ..scenario import Scenario, gen_profiles

__all__ = ["median_initial_decision", "calibrate_cost_scale"]


def median_initial_decision(scenario: Scenario, seeds: Iterable[int]) -> float:
    """Median data size over all clients of all seeds at ``alpha = m_max / (2N)``."""
    client = KktClient(scenario.cm)
    alpha = scenario.m_max / (2.0 * scenario.n_cavs)
    sizes = []
    for seed in seeds:
        profiles = gen_profiles(scenario, seed)
        sizes.append(client.batch(profiles, np.full(len(profiles), alpha)))
    return float(np.median(np.concatenate(sizes)))


def calibrate_cost_scale(
    scenario: Scenario | None = None,
    seeds: Iterable[int] = range(10),
    tol: float = 1e-4,
) -> float:
    """Bisection for the smallest cost scale giving an interior median decision.

    The median decision only falls as the scale grows, so the scales at
    which it leaves the upper bound form a half-line whose left end is
    located to within ``tol``. The right end of the final bracket is
    returned, which is itself interior.
    """
    scenario = Scenario() if scenario is None else scenario
    seeds = list(seeds)
    ub = min(scenario.d_max, (scenario.t_max * scenario.capacity_f - scenario.cm.q) / scenario.cm.p)

    def median_at(scale: float) -> float:
        return median_initial_decision(replace(scenario, cost_scale=scale), seeds)

    hi = 1.0
    while median_at(hi) >= ub:
        hi *= 2.0
        if hi > 1e12:
            raise ValueError("no cost scale moves the median client off its upper bound")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if median_at(mid) < ub:
            hi = mid
        else:
            lo = mid
    if not median_at(hi) > scenario.d_min:
        raise ValueError("median client jumps straight from the upper to the lower bound")
    return hi
