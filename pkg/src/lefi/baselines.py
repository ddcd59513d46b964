"""Comparison optimizers: random search and GP/expected-improvement search.

Both treat the whole weight vector as one black-box input, evaluate it
through the clients and apply the same budget projection as LeFi.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from . import gpr
from .client import ClientFn, KktClient
from .models import AccuracyModel, CavProfile, eval_accuracy
from .optimizer import make_row, settle_budget
from .records import IterationRecord, RunRecord
from .scenario import Scenario, gen_profiles, method_rng

__all__ = [
    "Evaluation",
    "BoState",
    "default_bounds",
    "evaluate_weights",
    "random_search_step",
    "ei_from_moments",
    "expected_improvement",
    "propose",
    "bara_step",
    "random_run",
    "bara_run",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class Evaluation:
    alpha: np.ndarray
    d: np.ndarray
    payout: float
    objective: float
    projected: bool


def default_bounds(n_cavs: int, m_max: float) -> np.ndarray:
    """Per-client search box ``[0, m_max]``: one client can take at most the whole budget."""
    return np.tile([0.0, float(m_max)], (n_cavs, 1))


def evaluate_weights(
    alpha, profiles: Sequence[CavProfile], client_fn: ClientFn, acc_model: AccuracyModel, m_max: float
) -> Evaluation:
    w, d, pay, projected = settle_budget(alpha, profiles, client_fn, m_max)
    pis = np.array([p.pi for p in profiles])
    acc = np.clip(np.atleast_1d(eval_accuracy(acc_model, d, pis)), 0.0, 1.0)
    return Evaluation(w, d, pay, float(np.sum(acc)), projected)


def random_search_step(
    bounds, rng: np.random.Generator, profiles, client_fn: ClientFn, acc_model: AccuracyModel, m_max: float
) -> Evaluation:
    """Draw weights uniformly in ``bounds`` and evaluate them."""
    bounds = np.asarray(bounds, dtype=np.float64)
    alpha = rng.uniform(bounds[:, 0], bounds[:, 1])
    return evaluate_weights(alpha, profiles, client_fn, acc_model, m_max)


def ei_from_moments(mu, sigma, best: float, xi: float = 0.01):
    """Expected improvement for maximization given predictive moments."""
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    gain = mu - best - xi
    safe = np.where(sigma > 0, sigma, 1.0)
    with np.errstate(over="ignore"):
        # a denormal sigma sends z*z to inf, and exp(-inf) is the right answer
        z = gain / safe
        ei = gain * ndtr(z) + sigma * _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    out = np.where(sigma > 0, np.maximum(ei, 0.0), np.maximum(gain, 0.0))
    return out[()] if out.ndim == 0 else out


def expected_improvement(surrogate: gpr.GprModel, x, best_so_far: float, xi: float = 0.01):
    """EI of the surrogate at one input (or each row of a 2-D array)."""
    x = np.asarray(x, dtype=np.float64)
    mu, sigma = gpr.predict_many(surrogate, x)
    ei = ei_from_moments(mu, sigma, best_so_far, xi)
    return float(ei[0]) if x.ndim < 2 else ei


@dataclass
class BoState:
    bounds: np.ndarray
    xi: float = 0.01
    observations: list[np.ndarray] = field(default_factory=list)
    objectives: list[float] = field(default_factory=list)
    surrogate: gpr.GprModel | None = None
    history: list[IterationRecord] = field(default_factory=list)
    gpr_config: gpr.GprConfig = field(default_factory=gpr.GprConfig)
    rescale: bool = True

    @property
    def best_so_far(self) -> float:
        return max(self.objectives) if self.objectives else -math.inf

    @property
    def incumbent(self) -> np.ndarray:
        return self.observations[int(np.argmax(self.objectives))]

    def record(self, ev: Evaluation) -> None:
        self.observations.append(ev.alpha)
        self.objectives.append(ev.objective)


def propose(state: BoState, candidates) -> tuple[int, np.ndarray]:
    """Index and value of the EI-maximizing candidate; the first wins ties.

    With ``state.rescale`` each candidate is first scaled so its total
    weight matches the incumbent's, which keeps proposals on the budget
    surface the observations live on.
    """
    cand = np.array(candidates, dtype=np.float64)
    if state.rescale:
        target = float(np.sum(state.incumbent))
        totals = cand.sum(axis=1, keepdims=True)
        cand = np.where(totals > 0, cand * (target / np.where(totals > 0, totals, 1.0)), cand)
        cand = np.clip(cand, state.bounds[:, 0], state.bounds[:, 1])
    ei = np.atleast_1d(expected_improvement(state.surrogate, cand, state.best_so_far, state.xi))
    k = int(np.argmax(ei))
    return k, ei


def bara_step(
    state: BoState,
    rng: np.random.Generator,
    candidate_count: int,
    profiles: Sequence[CavProfile],
    client_fn: ClientFn,
    acc_model: AccuracyModel,
    m_max: float,
) -> BoState:
    """Fit the joint surrogate, pick the best of ``candidate_count`` random proposals, evaluate it."""
    if not state.observations:
        raise ValueError("bara_step needs at least one prior observation")
    t0 = time.perf_counter()
    state.surrogate = gpr.fit(np.array(state.observations), np.array(state.objectives), state.gpr_config)
    raw = rng.uniform(state.bounds[:, 0], state.bounds[:, 1], (candidate_count, len(profiles)))
    k, _ = propose(state, raw)
    chosen = raw[k]
    if state.rescale:
        total = chosen.sum()
        if total > 0:
            chosen = np.clip(chosen * (np.sum(state.incumbent) / total), state.bounds[:, 0], state.bounds[:, 1])
    ev = evaluate_weights(chosen, profiles, client_fn, acc_model, m_max)
    state.record(ev)
    state.history.append(
        make_row(len(state.history) + 1, ev.alpha, ev.d, profiles, acc_model, ev.payout, ev.projected,
                 time.perf_counter() - t0)
    )
    return state


def _setup(scenario: Scenario, rounds, seed, profiles, client_fn):
    rounds = scenario.rounds if rounds is None else rounds
    seed = scenario.seed if seed is None else seed
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    if profiles is None:
        profiles = gen_profiles(scenario, seed)
    if client_fn is None:
        client_fn = KktClient(scenario.cm)
    return rounds, seed, profiles, client_fn


def random_run(
    scenario: Scenario,
    rounds: int | None = None,
    seed: int | None = None,
    profiles: Sequence[CavProfile] | None = None,
    client_fn: ClientFn | None = None,
) -> RunRecord:
    rounds, seed, profiles, client_fn = _setup(scenario, rounds, seed, profiles, client_fn)
    rng = method_rng(seed)
    bounds = default_bounds(len(profiles), scenario.m_max)
    rows = []
    for t in range(1, rounds + 1):
        t0 = time.perf_counter()
        ev = random_search_step(bounds, rng, profiles, client_fn, scenario.acc_model, scenario.m_max)
        rows.append(make_row(t, ev.alpha, ev.d, profiles, scenario.acc_model, ev.payout, ev.projected,
                             time.perf_counter() - t0))
    return RunRecord(method="random", seed=seed, scenario=scenario, rows=rows)


def bara_run(
    scenario: Scenario,
    rounds: int | None = None,
    seed: int | None = None,
    profiles: Sequence[CavProfile] | None = None,
    client_fn: ClientFn | None = None,
) -> RunRecord:
    """One random evaluation to seed the surrogate, then ``rounds - 1`` EI steps."""
    rounds, seed, profiles, client_fn = _setup(scenario, rounds, seed, profiles, client_fn)
    rng = method_rng(seed)
    state = BoState(
        bounds=default_bounds(len(profiles), scenario.m_max),
        xi=scenario.xi,
        gpr_config=gpr.GprConfig(noise=scenario.gp_noise),
    )
    t0 = time.perf_counter()
    ev = random_search_step(state.bounds, rng, profiles, client_fn, scenario.acc_model, scenario.m_max)
    state.record(ev)
    state.history.append(make_row(1, ev.alpha, ev.d, profiles, scenario.acc_model, ev.payout, ev.projected,
                                  time.perf_counter() - t0))
    for _ in range(rounds - 1):
        bara_step(state, rng, scenario.candidate_count, profiles, client_fn, scenario.acc_model, scenario.m_max)
    return RunRecord(method="bara", seed=seed, scenario=scenario, rows=list(state.history))
