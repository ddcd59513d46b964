"""Server-side learn-to-incentivize optimizer.

Each round the server

1. refits one GP per client on every (reward weight, data size) pair seen so far,
2. estimates ``dD/dalpha`` by a sampled finite difference through that GP,
3. chains it with ``dA/dD`` and takes a gradient step on the weights,
4. scales all weights down uniformly when the payout reaches the budget,
5. posts the weights and records the clients' responses.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import gpr
from .client import ClientFn, KktClient, respond_all
from .errors import DomainError, NotFittedError
from .models import AccuracyModel, CavProfile, ComputeModel, accuracy_grad_d, eval_accuracy, total_payout
from .records import IterationRecord, RunRecord
from .scenario import Scenario, gen_profiles, method_rng

__all__ = [
    "LefiConfig",
    "ServerState",
    "estimate_sensitivity_gradient",
    "chain_gradient",
    "update_weights",
    "project_weights",
    "settle_budget",
    "make_row",
    "warm_start",
    "lefi_step",
    "lefi_run",
]

# relative gap to the budget at which the exact-budget search stops
_SETTLE_RTOL = 1e-13


@dataclass(frozen=True)
class LefiConfig:
    eta: float = 1.0
    delta: float = 0.05
    warmup: int = 3
    warmup_factors: tuple[float, ...] = (0.5, 1.0, 1.5)
    gpr: gpr.GprConfig = field(default_factory=gpr.GprConfig)

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "LefiConfig":
        factors = (0.5, 1.0, 1.5)
        if scenario.warmup != 3:
            factors = tuple(np.linspace(0.5, 1.5, scenario.warmup)) if scenario.warmup > 1 else (1.0,)
        return cls(
            eta=scenario.step_size(),
            delta=scenario.probe_step(),
            warmup=scenario.warmup,
            warmup_factors=factors,
            gpr=gpr.GprConfig(noise=scenario.gp_noise),
        )


@dataclass
class ServerState:
    weights: np.ndarray
    m_max: float
    eta: float
    delta: float
    rng: np.random.Generator
    obs_alpha: list[np.ndarray] = field(default_factory=list)
    obs_d: list[np.ndarray] = field(default_factory=list)
    d_last: np.ndarray | None = None
    surrogates: list[gpr.GprModel] = field(default_factory=list)
    history: list[IterationRecord] = field(default_factory=list)
    gpr_config: gpr.GprConfig = field(default_factory=gpr.GprConfig)

    @property
    def t(self) -> int:
        return len(self.history)

    def training_set(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """All observed ``(alpha_n, D_n)`` pairs for client ``n``, oldest first."""
        return np.array([a[n] for a in self.obs_alpha]), np.array([d[n] for d in self.obs_d])


def estimate_sensitivity_gradient(surrogate: gpr.GprModel, alpha: float, delta: float, rng) -> float:
    """Sampled finite difference of the learned data-size response, in kilo-samples per USD."""
    if not delta > 0:
        raise DomainError("probe step must be positive")
    if surrogate is None:
        raise NotFittedError("surrogate has not been fitted")
    probe = gpr.sample_posterior(surrogate, alpha + delta, rng)
    base, _ = gpr.predict(surrogate, alpha)
    return (probe - base) / delta


def chain_gradient(acc_model: AccuracyModel, pi, d_current, sens_grad):
    """``dA/dalpha = dA/dD * dD/dalpha`` evaluated at the current data size."""
    return accuracy_grad_d(acc_model, d_current, pi) * sens_grad


def update_weights(weights, gradients, eta: float) -> np.ndarray:
    """Gradient ascent step, clamped at zero since a reward cap cannot be negative."""
    weights = np.asarray(weights, dtype=np.float64)
    gradients = np.asarray(gradients, dtype=np.float64)
    if weights.shape != gradients.shape:
        raise DomainError("gradient and weight vectors differ in length")
    if not np.all(np.isfinite(gradients)):
        raise DomainError("gradients must be finite")
    return np.maximum(0.0, weights + eta * gradients)


def project_weights(weights, profiles: Sequence[CavProfile], d_observed, m_max: float) -> np.ndarray:
    """Scale every weight by ``m_max / payout`` when the payout at ``d_observed`` reaches the budget."""
    weights = np.asarray(weights, dtype=np.float64)
    payout = total_payout(weights, profiles, d_observed)
    if payout >= m_max and payout > 0:
        return weights * (m_max / payout)
    return weights.copy()


def settle_budget(weights, profiles: Sequence[CavProfile], client_fn: ClientFn, m_max: float):
    """Post ``weights``, and if the clients' answer breaks the budget, project until it does not.

    Clients answer a smaller weight with a smaller data size, so one
    projection at the observed sizes can leave money on the table. The
    projection is repeated at each new response, bracketed by a false-position
    search on the common scale factor, until the payout sits on the budget
    (relative gap below 1e-13) from the feasible side.

    Returns ``(weights, sizes, payout, projected)``.
    """
    weights = np.asarray(weights, dtype=np.float64)
    d = respond_all(client_fn, profiles, weights)
    pay = total_payout(weights, profiles, d)
    if pay < m_max or pay == 0.0:
        return weights, d, pay, False
    if pay == m_max:
        return weights, d, pay, True

    def evaluate(scale):
        w = weights * scale
        dd = respond_all(client_fn, profiles, w)
        return w, dd, total_payout(w, profiles, dd)

    s_hi, f_hi = 1.0, pay - m_max
    s_lo = m_max / pay
    w_lo, d_lo, g_lo = evaluate(s_lo)
    if g_lo > m_max:
        # only a non-monotone client can get here; fall back to plain projection
        s_lo = 0.0
        w_lo, d_lo, g_lo = evaluate(0.0)
    f_lo = g_lo - m_max
    side = 0
    for _ in range(200):
        if m_max - g_lo <= _SETTLE_RTOL * m_max or s_hi - s_lo <= 4 * np.spacing(s_hi):
            break
        s = s_lo - f_lo * (s_hi - s_lo) / (f_hi - f_lo)
        if not s_lo < s < s_hi:
            s = 0.5 * (s_lo + s_hi)
        w, dd, g = evaluate(s)
        f = g - m_max
        if f <= 0:
            s_lo, f_lo, w_lo, d_lo, g_lo = s, f, w, dd, g
            if side == -1:
                f_hi *= 0.5
            side = -1
        else:
            s_hi, f_hi = s, f
            if side == 1:
                f_lo *= 0.5
            side = 1
    return w_lo, d_lo, g_lo, True


def make_row(t, weights, sizes, profiles, acc_model, payout, projected, wall_time) -> IterationRecord:
    """Trace row; accuracies are clipped to [0, 1] here and only here."""
    pis = np.array([p.pi for p in profiles])
    acc = np.clip(np.atleast_1d(eval_accuracy(acc_model, sizes, pis)), 0.0, 1.0)
    objective = float(np.sum(acc))
    return IterationRecord(
        t=t,
        alpha=np.array(weights, dtype=np.float64),
        d=np.array(sizes, dtype=np.float64),
        payout=float(payout),
        objective=objective,
        mean_accuracy=objective / len(profiles),
        projected=bool(projected),
        wall_time=wall_time,
    )


def _refit(state: ServerState, n_clients: int) -> None:
    state.surrogates = [gpr.fit(*state.training_set(n), state.gpr_config) for n in range(n_clients)]


def warm_start(
    profiles: Sequence[CavProfile],
    m_max: float,
    client_fn: ClientFn,
    config: LefiConfig,
    rng: np.random.Generator,
) -> ServerState:
    """Seed each client's surrogate with probe rounds, then set the initial weights.

    Probe weights are ``u_n * factor`` with ``u_n ~ U[0.1, m_max/N]`` drawn
    once per client. Probes respect the budget like any other round. The
    starting weights are ``m_max / (2N)`` for every client.
    """
    n = len(profiles)
    lo, hi = sorted((0.1, m_max / n))
    base = rng.uniform(lo, hi, n) if hi > lo else np.full(n, lo)
    state = ServerState(
        weights=np.full(n, m_max / (2.0 * n)),
        m_max=m_max,
        eta=config.eta,
        delta=config.delta,
        rng=rng,
        gpr_config=config.gpr,
    )
    for factor in config.warmup_factors[: config.warmup]:
        w, d, _, _ = settle_budget(base * factor, profiles, client_fn, m_max)
        state.obs_alpha.append(w)
        state.obs_d.append(d)
    _refit(state, n)
    # no response has been seen at the starting weights yet; use the surrogate's guess
    guess = [gpr.predict(s, a)[0] for s, a in zip(state.surrogates, state.weights)]
    state.d_last = np.maximum(np.array(guess), 0.0)
    return state


def lefi_step(
    state: ServerState,
    profiles: Sequence[CavProfile],
    cm: ComputeModel | None,
    acc_model: AccuracyModel,
    client_fn: ClientFn | None = None,
) -> ServerState:
    """Run one full server round in place and return ``state``."""
    t0 = time.perf_counter()
    if client_fn is None:
        client_fn = KktClient(cm)
    n = len(profiles)
    if state.t > 0:
        _refit(state, n)

    grads = np.empty(n)
    for i, (prof, sur) in enumerate(zip(profiles, state.surrogates)):
        sens = estimate_sensitivity_gradient(sur, float(state.weights[i]), state.delta, state.rng)
        grads[i] = chain_gradient(acc_model, prof.pi, float(state.d_last[i]), sens)

    w = update_weights(state.weights, grads, state.eta)
    w, d, pay, projected = settle_budget(w, profiles, client_fn, state.m_max)

    state.weights = w
    state.d_last = d
    state.obs_alpha.append(w)
    state.obs_d.append(d)
    state.history.append(
        make_row(state.t + 1, w, d, profiles, acc_model, pay, projected, time.perf_counter() - t0)
    )
    return state


def lefi_run(
    scenario: Scenario,
    rounds: int | None = None,
    seed: int | None = None,
    profiles: Sequence[CavProfile] | None = None,
    client_fn: ClientFn | None = None,
) -> RunRecord:
    """Warm start followed by ``rounds`` server rounds; returns the full trace."""
    rounds = scenario.rounds if rounds is None else rounds
    seed = scenario.seed if seed is None else seed
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    if profiles is None:
        profiles = gen_profiles(scenario, seed)
    if client_fn is None:
        client_fn = KktClient(scenario.cm)
    config = LefiConfig.from_scenario(scenario)
    rng = method_rng(seed)
    state = warm_start(profiles, scenario.m_max, client_fn, config, rng)
    for _ in range(rounds):
        lefi_step(state, profiles, scenario.cm, scenario.acc_model, client_fn)
    return RunRecord(method="lefi", seed=seed, scenario=scenario, rows=list(state.history))
