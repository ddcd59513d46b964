"""Command-line entry point: ``lefi run | sweep | rai | calibrate``.

Failures exit nonzero and print one JSON object on stderr, e.g.
``{"error": "ConfigError", "message": "..."}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import LefiError
from .harness import AXES, calibrate_cost_scale, emit_outputs, rai_from_dir, run_experiment, sweep
from .records import METHODS
from .scenario import Scenario


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed out of range: {text}")
    return value


def _int_list(text: str) -> list[int]:
    return [_u64(t) for t in text.split(",") if t.strip()]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _load(path) -> Scenario:
    return Scenario.from_json(path) if path else Scenario()


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def cmd_run(args) -> None:
    scenario = _load(args.config)
    record = run_experiment(scenario, args.method, args.rounds, args.seed)
    csv_path, json_path = emit_outputs(record, args.out)
    _emit({
        "method": record.method,
        "seed": record.seed,
        "final_objective": record.final_objective(),
        "reference_objective": record.reference_objective,
        "trace": str(csv_path),
        "manifest": str(json_path),
    })


def cmd_sweep(args) -> None:
    scenario = _load(args.config)
    table = sweep(scenario, args.axis, args.values, args.seeds, methods=args.methods,
                  rounds=args.rounds, workers=args.workers)
    emit_outputs(table, args.out)
    _emit({
        "axis": table.axis,
        "summary": str(Path(args.out) / f"sweep_{table.axis}.csv"),
        "medians": {m: dict(zip(map(str, table.values), table.medians(m))) for m in table.finals},
    })


def cmd_rai(args) -> None:
    report = rai_from_dir(args.in_dir)
    _emit(report.to_dict())


def cmd_calibrate(args) -> None:
    scenario = _load(args.config)
    _emit({"cost_scale": calibrate_cost_scale(scenario, args.seeds)})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lefi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one method on one seed")
    p.add_argument("--config", type=Path, help="scenario JSON (defaults if omitted)")
    p.add_argument("--method", choices=METHODS, default="lefi")
    p.add_argument("--seed", type=_u64, required=True)
    p.add_argument("--rounds", type=int, default=None, help="defaults to the scenario's rounds")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="median final objective over seeds for each axis value")
    p.add_argument("--config", type=Path)
    p.add_argument("--axis", choices=sorted(AXES), required=True)
    p.add_argument("--values", type=_float_list, required=True, help="comma-separated, e.g. 1,5,10,25")
    p.add_argument("--seeds", type=_int_list, required=True, help="comma-separated, e.g. 0,1,2")
    p.add_argument("--methods", type=lambda s: s.split(","), default=list(METHODS))
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rai", help="relative accuracy improvement from a directory of runs")
    p.add_argument("--in", dest="in_dir", type=Path, required=True)
    p.set_defaults(func=cmd_rai)

    p = sub.add_parser("calibrate", help="bisect the cost scale for an interior median client")
    p.add_argument("--config", type=Path)
    p.add_argument("--seeds", type=_int_list, default=list(range(10)))
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "methods", None):
        bad = [m for m in args.methods if m not in METHODS]
        if bad:
            print(json.dumps({"error": "ConfigError", "message": f"unknown methods: {bad}"}), file=sys.stderr)
            return 2
    try:
        args.func(args)
    except (LefiError, ValueError, ZeroDivisionError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
