"""Numerical hot kernels with a compiled core and a NumPy fallback.

The compiled extension ``_ckernels`` is used when it was built and imports
cleanly. Setting ``LEFI_PURE_PYTHON=1`` in the environment forces the
fallback, which is handy for debugging and for the backend benchmark.
"""

from __future__ import annotations

import importlib
import os
from types import ModuleType

_NAMES = ("sq_dists", "cholesky_jitter", "lml_grid", "revenue_grid_argmax")


def load_backend(name: str) -> ModuleType:
    """Import one backend explicitly: ``"cython"`` or ``"python"``."""
    if name == "cython":
        return importlib.import_module("lefi._kernels._ckernels")
    if name == "python":
        return importlib.import_module("lefi._kernels._pykernels")
    raise ValueError(f"unknown kernel backend {name!r}")


def _select() -> tuple[str, ModuleType]:
    if os.environ.get("LEFI_PURE_PYTHON", "") not in ("", "0"):
        return "python", load_backend("python")
    try:
        return "cython", load_backend("cython")
    except ImportError:
        return "python", load_backend("python")


BACKEND, _impl = _select()

sq_dists = _impl.sq_dists
cholesky_jitter = _impl.cholesky_jitter
lml_grid = _impl.lml_grid
revenue_grid_argmax = _impl.revenue_grid_argmax

__all__ = ["BACKEND", "load_backend", *_NAMES]
