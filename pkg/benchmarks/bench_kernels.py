"""Compiled vs NumPy kernels, one at a time and inside a full LeFi run.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from lefi import _kernels
from lefi.optimizer import lefi_run
from lefi.scenario import Scenario


def _cases(rng):
    x60 = rng.uniform(0, 1, (60, 1))
    x200 = rng.uniform(0, 1, (200, 10))
    y60 = np.sin(6 * x60[:, 0])
    ls = np.logspace(-1, 1, 7)
    sv = np.logspace(-1, 1, 5)
    return {
        "sq_dists 200x200x10": lambda k: k.sq_dists(x200, x200),
        "cholesky_jitter n=200": lambda k: k.cholesky_jitter(np.exp(-0.5 * k.sq_dists(x200, x200)) + 1e-6 * np.eye(200)),
        "lml_grid n=60 (7x5)": lambda k: k.lml_grid(k.sq_dists(x60, x60), y60, ls, sv, 1e-4),
        "revenue_grid_argmax res=1e-4": lambda k: k.revenue_grid_argmax(1.0, 0.5, 1e-4, 79.1259, 17.6219, 28.9, 0.0, 10.0, 1e-4),
    }


def _swap(backend):
    for name in ("sq_dists", "cholesky_jitter", "lml_grid", "revenue_grid_argmax"):
        setattr(_kernels, name, getattr(backend, name))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = {"python": _kernels.load_backend("python")}
    try:
        backends["cython"] = _kernels.load_backend("cython")
    except ImportError:
        print("compiled backend not built; timing the NumPy fallback only")

    cases = _cases(np.random.default_rng(0))
    print(f"{'kernel':32s}" + "".join(f"{b:>12s}" for b in backends) + "   speedup")
    for label, fn in cases.items():
        times = {}
        for name, mod in backends.items():
            number = 20
            times[name] = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number
        line = f"{label:32s}" + "".join(f"{times[b] * 1e3:10.3f}ms" for b in backends)
        if "cython" in times:
            line += f"   {times['python'] / times['cython']:6.2f}x"
        print(line)

    original = {n: getattr(_kernels, n) for n in ("sq_dists", "cholesky_jitter", "lml_grid", "revenue_grid_argmax")}
    scenario = Scenario(rounds=100)
    try:
        totals = {}
        for name, mod in backends.items():
            _swap(mod)
            totals[name] = min(timeit.repeat(lambda: lefi_run(scenario, seed=0), number=1, repeat=max(1, args.repeat // 2)))
        line = f"{'lefi_run N=10, 100 rounds':32s}" + "".join(f"{totals[b]:11.3f}s" for b in backends)
        if "cython" in totals:
            line += f"   {totals['python'] / totals['cython']:6.2f}x"
        print(line)
    finally:
        for n, f in original.items():
            setattr(_kernels, n, f)


if __name__ == "__main__":
    main()
