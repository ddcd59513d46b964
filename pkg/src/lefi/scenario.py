"""Experiment configuration and seeded client-population generation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Mapping

import numpy as np

from .errors import ConfigError
from .models import AccuracyModel, CavProfile, ComputeModel

__all__ = [
    "THETA_BASE",
    "DEFAULT_COST_SCALE",
    "Scenario",
    "gen_profiles",
    "gen_scenario",
    "method_rng",
]

# GPU rental price of 0.9 USD per hour, expressed per second
THETA_BASE = 0.9 / 3600.0

# calibrate_cost_scale() on the default scenario and seeds 0-9 gives 0.4376; rounded up
DEFAULT_COST_SCALE = 0.44

_PAIR_FIELDS = ("theta_range", "beta_range", "pi_range")


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one experiment, apart from the method."""

    n_cavs: int = 10
    m_max: float = 5.0
    t_max: float = 200.0
    d_max: float = 10.0
    d_min: float = 0.0
    theta_range: tuple[float, float] = (0.5 * THETA_BASE, 2.0 * THETA_BASE)
    cost_scale: float = DEFAULT_COST_SCALE
    beta_range: tuple[float, float] = (0.2, 1.0)
    pi_range: tuple[float, float] = (0.1, 1.0)
    capacity_f: float = 28.9
    acc_model: AccuracyModel = field(default_factory=AccuracyModel)
    cm: ComputeModel = field(default_factory=ComputeModel)
    eta: float | None = None
    delta: float | None = None
    eta_gain: float = 4.0
    delta_gain: float = 0.1
    warmup: int = 3
    rounds: int = 100
    seed: int = 0
    candidate_count: int = 512
    xi: float = 0.01
    gp_noise: float = 1e-4

    def __post_init__(self):
        for name in _PAIR_FIELDS:
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ConfigError(f"{name} must be ordered, got ({lo}, {hi})")
        if not (0.0 <= self.pi_range[0] and self.pi_range[1] <= 1.0):
            raise ConfigError("pi_range must lie within [0, 1]")
        if self.theta_range[0] < 0 or self.beta_range[0] <= 0:
            raise ConfigError("theta must be non-negative and beta positive")
        if self.n_cavs < 1:
            raise ConfigError("n_cavs must be at least 1")
        if self.m_max < 0:
            raise ConfigError("m_max must be non-negative")
        if not 0.0 <= self.d_min <= self.d_max:
            raise ConfigError("need 0 <= d_min <= d_max")
        if self.t_max <= 0 or self.capacity_f <= 0:
            raise ConfigError("t_max and capacity_f must be positive")
        if self.cost_scale < 0:
            raise ConfigError("cost_scale must be non-negative")
        for name in ("eta", "delta"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{name} must be positive when given")
        if not (self.eta_gain > 0 and self.delta_gain > 0):
            raise ConfigError("eta_gain and delta_gain must be positive")
        if not self.gp_noise > 0:
            raise ConfigError("gp_noise must be positive")
        if self.warmup < 1 or self.rounds < 0 or self.candidate_count < 1:
            raise ConfigError("warmup and candidate_count must be >= 1, rounds >= 0")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Scenario":
        """Build from a JSON-style mapping; unknown keys are rejected."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown scenario keys: {', '.join(unknown)}")
        kwargs = dict(data)
        try:
            for name in _PAIR_FIELDS:
                if name in kwargs:
                    lo, hi = kwargs[name]
                    kwargs[name] = (float(lo), float(hi))
            if "acc_model" in kwargs:
                kwargs["acc_model"] = AccuracyModel(**kwargs["acc_model"])
            if "cm" in kwargs:
                kwargs["cm"] = ComputeModel(**kwargs["cm"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed scenario field: {exc}") from exc
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "Scenario":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = asdict(self)
        for name in _PAIR_FIELDS:
            out[name] = list(out[name])
        return out

    @property
    def per_client_budget(self) -> float:
        """``m_max / N`` in USD; 1 USD when the budget is zero so step sizes stay usable."""
        return self.m_max / self.n_cavs if self.m_max > 0 else 1.0

    def step_size(self) -> float:
        """Gradient step ``eta``, by default ``eta_gain * (m_max / N)**2``.

        The gradient is objective per USD, so ``eta`` carries USD squared per
        objective unit and the per-client budget squared is its natural scale.
        """
        return self.eta if self.eta is not None else self.eta_gain * self.per_client_budget**2

    def probe_step(self) -> float:
        """Finite-difference probe ``delta``, by default ``delta_gain * m_max / N``."""
        return self.delta if self.delta is not None else self.delta_gain * self.per_client_budget

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)


def _uniform(rng: np.random.Generator, lo: float, hi: float, n: int) -> np.ndarray:
    # degenerate ranges return the constant exactly
    if lo == hi:
        return np.full(n, float(lo))
    return rng.uniform(lo, hi, n)


def gen_profiles(scenario: Scenario, seed: int | None = None) -> list[CavProfile]:
    """Draw a client population; identical for identical ``(scenario, seed)``."""
    seed = scenario.seed if seed is None else seed
    rng = np.random.default_rng([int(seed), 0])
    n = scenario.n_cavs
    theta = _uniform(rng, *scenario.theta_range, n) * scenario.cost_scale
    beta = _uniform(rng, *scenario.beta_range, n)
    pi = _uniform(rng, *scenario.pi_range, n)
    return [
        CavProfile(
            id=i,
            beta=float(beta[i]),
            theta=float(theta[i]),
            capacity_f=scenario.capacity_f,
            pi=float(pi[i]),
            d_min=scenario.d_min,
            d_max=scenario.d_max,
            t_max=scenario.t_max,
        )
        for i in range(n)
    ]


def gen_scenario(config: Scenario | Mapping[str, Any] | None = None, seed: int | None = None):
    """Resolve a config (mapping or :class:`Scenario`) and draw its clients."""
    if config is None:
        scenario = Scenario()
    elif isinstance(config, Scenario):
        scenario = config
    else:
        scenario = Scenario.from_dict(config)
    if seed is not None:
        scenario = replace(scenario, seed=int(seed))
    return scenario, gen_profiles(scenario)


def method_rng(seed: int) -> np.random.Generator:
    """Random stream for an optimizer; independent of the population stream."""
    return np.random.default_rng([int(seed), 1])
