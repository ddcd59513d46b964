"""Running methods, sweeping one scenario axis, and the RAI metric."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..baselines import bara_run, evaluate_weights, random_run
from ..client import KktClient
from ..errors import ConfigError
from ..optimizer import lefi_run
from ..records import METHODS, RunRecord
from ..scenario import Scenario, gen_profiles

__all__ = [
    "AXES",
    "RaiReport",
    "SweepTable",
    "reference_objective",
    "run_experiment",
    "compute_rai",
    "sweep",
]

_RUNNERS = {"lefi": lefi_run, "random": random_run, "bara": bara_run}

# sweep axis name -> Scenario field
AXES = {"budget": "m_max", "latency": "t_max", "n_cavs": "n_cavs"}


def reference_objective(scenario: Scenario, seed: int | None = None, profiles=None) -> float:
    """Objective at uniform weights ``m_max / (2N)``, passed once through the clients."""
    if profiles is None:
        profiles = gen_profiles(scenario, seed)
    alpha = np.full(len(profiles), scenario.m_max / (2.0 * len(profiles)))
    return evaluate_weights(alpha, profiles, KktClient(scenario.cm), scenario.acc_model, scenario.m_max).objective


def run_experiment(scenario: Scenario, method: str, rounds: int | None = None, seed: int | None = None) -> RunRecord:
    """Run one method on one seeded population; the RAI reference is attached to the record."""
    if method not in _RUNNERS:
        raise ConfigError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    rounds = scenario.rounds if rounds is None else rounds
    seed = scenario.seed if seed is None else seed
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    scenario = replace(scenario, seed=int(seed), rounds=int(rounds))
    profiles = gen_profiles(scenario, seed)
    record = _RUNNERS[method](scenario, rounds=rounds, seed=seed, profiles=profiles)
    record.reference_objective = reference_objective(scenario, profiles=profiles)
    return record


@dataclass
class RaiReport:
    """``values[method][n_cavs]`` is the median RAI over the seeds in ``samples``."""

    values: dict[str, dict[int, float]] = field(default_factory=dict)
    samples: dict[str, dict[int, list[float]]] = field(default_factory=dict)

    def add(self, method: str, n_cavs: int, rai: float) -> None:
        self.samples.setdefault(method, {}).setdefault(n_cavs, []).append(float(rai))
        self.values.setdefault(method, {})[n_cavs] = float(np.median(self.samples[method][n_cavs]))

    def to_dict(self) -> dict:
        return {
            "median": {m: {str(n): v for n, v in sorted(per.items())} for m, per in self.values.items()},
            "samples": {m: {str(n): v for n, v in sorted(per.items())} for m, per in self.samples.items()},
        }


def compute_rai(
    objectives: Mapping[str, float | RunRecord],
    reference: float,
    n_cavs: int | None = None,
    report: RaiReport | None = None,
) -> RaiReport:
    """``(obj_m - ref) / (obj_lefi - ref)`` for every method in ``objectives``.

    Values may be final objectives or whole records. Raises when LeFi made
    no improvement over the reference, since the ratio is then undefined.
    """
    finals = {m: (o.final_objective() if isinstance(o, RunRecord) else float(o)) for m, o in objectives.items()}
    if "lefi" not in finals:
        raise ValueError("RAI needs a lefi result as its denominator")
    if n_cavs is None:
        recs = [o for o in objectives.values() if isinstance(o, RunRecord)]
        n_cavs = recs[0].scenario.n_cavs if recs else 0
    denom = finals["lefi"] - reference
    if denom == 0.0:
        raise ZeroDivisionError("lefi objective equals the reference objective; RAI is undefined")
    report = RaiReport() if report is None else report
    for method, obj in finals.items():
        report.add(method, n_cavs, 1.0 if method == "lefi" else (obj - reference) / denom)
    return report


@dataclass
class SweepTable:
    axis: str
    values: list[float]
    seeds: list[int]
    finals: dict[str, dict[float, list[float]]]
    records: list[RunRecord] = field(default_factory=list, repr=False)

    def median(self, method: str, value: float) -> float:
        return float(np.median(self.finals[method][value]))

    def medians(self, method: str) -> list[float]:
        return [self.median(method, v) for v in self.values]

    def rows(self):
        """``(method, value, median, n_seeds)`` in method-then-value order."""
        for method in self.finals:
            for v in self.values:
                yield method, v, self.median(method, v), len(self.finals[method][v])


def _axis_value(axis: str, value):
    return int(value) if axis == "n_cavs" else float(value)


def _run_job(job):
    scenario, method, rounds, seed = job
    return run_experiment(scenario, method, rounds, seed)


def sweep(
    config: Scenario | None,
    axis: str,
    values: Iterable[float],
    seeds: Iterable[int],
    methods: Sequence[str] = METHODS,
    rounds: int | None = None,
    workers: int = 1,
) -> SweepTable:
    """Median final objective per (method, axis value) over ``seeds``.

    ``workers > 1`` farms runs out to processes; every run is seeded on
    its own so the table does not depend on scheduling.
    """
    if axis not in AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {', '.join(AXES)}")
    values = [_axis_value(axis, v) for v in values]
    seeds = [int(s) for s in seeds]
    if not values or not seeds:
        raise ValueError("sweep needs at least one value and one seed")
    base = Scenario() if config is None else config
    jobs = [
        (replace(base, **{AXES[axis]: v}), m, rounds, s) for m in methods for v in values for s in seeds
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_job, jobs))
    else:
        records = [_run_job(j) for j in jobs]
    finals: dict[str, dict[float, list[float]]] = {m: {v: [] for v in values} for m in methods}
    for (sc, m, _, _), rec in zip(jobs, records):
        finals[m][getattr(sc, AXES[axis])].append(rec.final_objective())
    return SweepTable(axis=axis, values=values, seeds=seeds, finals=finals, records=records)
