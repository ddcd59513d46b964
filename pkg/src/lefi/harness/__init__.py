"""Experiment orchestration, persistence and calibration."""

from .calibrate import calibrate_cost_scale, median_initial_decision
from .experiment import AXES, RaiReport, SweepTable, compute_rai, reference_objective, run_experiment, sweep
from .io import emit_outputs, emit_run, emit_sweep, load_manifests, rai_from_dir, trace_csv

__all__ = [
    "AXES",
    "RaiReport",
    "SweepTable",
    "calibrate_cost_scale",
    "compute_rai",
    "emit_outputs",
    "emit_run",
    "emit_sweep",
    "load_manifests",
    "median_initial_decision",
    "rai_from_dir",
    "reference_objective",
    "run_experiment",
    "sweep",
    "trace_csv",
]
