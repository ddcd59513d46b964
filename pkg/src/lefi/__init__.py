"""Learning-based reward allocation for federated learning over vehicles.

The server never sees client costs. It learns each client's data-size
response to its reward weight with a GP surrogate and climbs the
accuracy gradient through it, subject to a payout budget.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .baselines import bara_run, random_run
from .client import KktClient, solve_data_selection
from .models import AccuracyModel, CavProfile, ComputeModel
from .optimizer import lefi_run, lefi_step, warm_start
from .records import METHODS, IterationRecord, RunRecord
from .scenario import Scenario, gen_profiles, gen_scenario

__all__ = [
    "BACKEND",
    "METHODS",
    "AccuracyModel",
    "CavProfile",
    "ComputeModel",
    "IterationRecord",
    "KktClient",
    "RunRecord",
    "Scenario",
    "bara_run",
    "gen_profiles",
    "gen_scenario",
    "lefi_run",
    "lefi_step",
    "random_run",
    "solve_data_selection",
    "warm_start",
]
