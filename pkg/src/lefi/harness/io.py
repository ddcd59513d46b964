"""CSV traces, JSON manifests and reading them back.

Everything that must be reproducible goes in the CSV; wall-clock time
and library versions live only in the manifest.
"""

from __future__ import annotations

import csv
import io
import json
import os
import platform
import tempfile
from pathlib import Path
from typing import Iterable

import numpy as np
import scipy

from .. import _kernels
from ..records import RunRecord
from .experiment import AXES, RaiReport, SweepTable, compute_rai

__all__ = [
    "fmt",
    "trace_header",
    "trace_csv",
    "run_stem",
    "atomic_write",
    "emit_outputs",
    "emit_run",
    "emit_sweep",
    "load_manifests",
    "rai_from_dir",
]


def fmt(x: float) -> str:
    return format(float(x), ".9g")


def trace_header(n_cavs: int) -> list[str]:
    return (
        ["t", "method", "seed", "objective", "mean_accuracy", "payout"]
        + [f"alpha_{i}" for i in range(n_cavs)]
        + [f"d_{i}" for i in range(n_cavs)]
    )


def trace_csv(record: RunRecord) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(trace_header(record.scenario.n_cavs))
    for r in record.rows:
        w.writerow(
            [r.t, record.method, record.seed, fmt(r.objective), fmt(r.mean_accuracy), fmt(r.payout)]
            + [fmt(a) for a in r.alpha]
            + [fmt(d) for d in r.d]
        )
    return buf.getvalue()


def run_stem(record: RunRecord) -> str:
    return f"{record.method}_n{record.scenario.n_cavs}_seed{record.seed}"


def atomic_write(path: Path, text: str) -> None:
    """Write via a sibling temp file and ``os.replace`` so readers never see a partial file."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror or exc}") from exc


def _versions() -> dict:
    from .. import __version__

    return {
        "lefi": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "kernels": _kernels.BACKEND,
    }


def _manifest(record: RunRecord) -> dict:
    return {
        "method": record.method,
        "seed": record.seed,
        "rounds": len(record.rows),
        "n_cavs": record.scenario.n_cavs,
        "config_hash": record.config_hash,
        "scenario": record.scenario.to_dict(),
        "final_objective": record.final_objective(),
        "reference_objective": record.reference_objective,
        "wall_time_s": float(sum(r.wall_time for r in record.rows)),
        "versions": _versions(),
        "trace": run_stem(record) + ".csv",
    }


def emit_run(record: RunRecord, out_dir) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` and ``<stem>.json`` for one run."""
    out_dir = Path(out_dir)
    stem = run_stem(record)
    csv_path, json_path = out_dir / f"{stem}.csv", out_dir / f"{stem}.json"
    atomic_write(csv_path, trace_csv(record))
    atomic_write(json_path, json.dumps(_manifest(record), indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


def emit_sweep(table: SweepTable, out_dir) -> list[Path]:
    """Per-run traces plus ``sweep_<axis>.csv`` with one median per (method, value)."""
    out_dir = Path(out_dir)
    paths = []
    for rec in table.records:
        paths.extend(emit_run(rec, out_dir / "runs" / f"{table.axis}_{fmt(_axis_of(table, rec))}"))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["axis", "value", "method", "median_final_objective", "n_seeds"])
    for method, value, med, count in table.rows():
        w.writerow([table.axis, fmt(value), method, fmt(med), count])
    summary = out_dir / f"sweep_{table.axis}.csv"
    atomic_write(summary, buf.getvalue())
    paths.append(summary)
    return paths


def _axis_of(table: SweepTable, record: RunRecord):
    return getattr(record.scenario, AXES[table.axis])


def emit_outputs(items, out_dir) -> list[Path]:
    """Persist run records and/or sweep tables under ``out_dir``."""
    if isinstance(items, (RunRecord, SweepTable)):
        items = [items]
    paths: list[Path] = []
    for item in items:
        if isinstance(item, RunRecord):
            paths.extend(emit_run(item, out_dir))
        elif isinstance(item, SweepTable):
            paths.extend(emit_sweep(item, out_dir))
        else:
            raise TypeError(f"cannot emit {type(item).__name__}")
    return paths


def load_manifests(in_dir) -> list[dict]:
    """Every run manifest below ``in_dir``, sorted by path."""
    in_dir = Path(in_dir)
    if not in_dir.is_dir():
        raise FileNotFoundError(f"{in_dir}: not a directory")
    out = []
    for path in sorted(in_dir.rglob("*.json")):
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if isinstance(data, dict) and "method" in data and "final_objective" in data:
            data["_path"] = str(path)
            out.append(data)
    return out


def rai_from_dir(in_dir, manifests: Iterable[dict] | None = None) -> RaiReport:
    """Group runs by (population size, config, seed) and compute RAI for each complete group.

    Groups are keyed by the scenario without its method-specific fields, so
    the three methods of one seed compare against the same reference.
    """
    manifests = load_manifests(in_dir) if manifests is None else list(manifests)
    groups: dict[tuple, dict[str, dict]] = {}
    for m in manifests:
        sc = dict(m["scenario"])
        key = (m["n_cavs"], m["seed"], json.dumps(sc, sort_keys=True))
        groups.setdefault(key, {})[m["method"]] = m
    report = RaiReport()
    for (n_cavs, _, _), by_method in sorted(groups.items(), key=lambda kv: kv[0]):
        if "lefi" not in by_method:
            continue
        ref = by_method["lefi"]["reference_objective"]
        if ref is None:
            continue
        compute_rai({k: v["final_objective"] for k, v in by_method.items()}, ref, n_cavs, report)
    if not report.values:
        raise ValueError(f"{in_dir}: no run groups containing a lefi result")
    return report
