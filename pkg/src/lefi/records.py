"""Per-iteration traces shared by every optimizer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scenario import Scenario

METHODS = ("lefi", "random", "bara")


@dataclass(frozen=True, eq=False)
class IterationRecord:
    t: int
    alpha: np.ndarray
    d: np.ndarray
    payout: float
    objective: float
    mean_accuracy: float
    projected: bool = False
    wall_time: float = 0.0

    def same_values(self, other: "IterationRecord") -> bool:
        """Bitwise equality of everything except wall-clock time."""
        return (
            self.t == other.t
            and np.array_equal(self.alpha, other.alpha)
            and np.array_equal(self.d, other.d)
            and self.payout == other.payout
            and self.objective == other.objective
            and self.mean_accuracy == other.mean_accuracy
            and self.projected == other.projected
        )


@dataclass(eq=False)
class RunRecord:
    method: str
    seed: int
    scenario: Scenario
    rows: list[IterationRecord] = field(default_factory=list)
    reference_objective: float | None = None

    @property
    def config_hash(self) -> str:
        return self.scenario.config_hash()

    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.rows])

    def best_so_far(self) -> np.ndarray:
        return np.maximum.accumulate(self.objectives())

    def final_objective(self) -> float:
        """Headline number: the last iterate for LeFi, the incumbent for the searches."""
        if not self.rows:
            raise ValueError("empty trace")
        if self.method == "lefi":
            return float(self.rows[-1].objective)
        return float(self.best_so_far()[-1])

    def alphas(self) -> np.ndarray:
        return np.array([r.alpha for r in self.rows])

    def sizes(self) -> np.ndarray:
        return np.array([r.d for r in self.rows])
