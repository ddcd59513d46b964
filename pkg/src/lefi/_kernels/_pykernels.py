"""Pure NumPy implementations of the numerical kernels.

This module is the fallback used when the compiled extension is missing,
and the reference the compiled twin is tested against.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_triangular

_LOG_2PI = math.log(2.0 * math.pi)


def sq_dists(a, b):
    """Pairwise squared Euclidean distances between rows of ``a`` and ``b``."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def cholesky_jitter(k, jitter0=1e-8, jitter_max=1e-2):
    """Lower Cholesky factor of ``k``, adding diagonal jitter on failure.

    The first attempt uses ``k`` as given; later attempts add ``jitter0``,
    ``10 * jitter0`` and so on up to ``jitter_max``. Returns ``(L, jitter)``;
    raises ``np.linalg.LinAlgError`` when every attempt fails.
    """
    k = np.asarray(k, dtype=np.float64)
    jitter = 0.0
    while True:
        try:
            if jitter:
                return np.linalg.cholesky(k + jitter * np.eye(k.shape[0])), jitter
            return np.linalg.cholesky(k), jitter
        except np.linalg.LinAlgError:
            jitter = jitter0 if jitter == 0.0 else jitter * 10.0
            if jitter > jitter_max * (1 + 1e-9):
                raise


def _lml_from_chol(chol, y):
    z = solve_triangular(chol, y, lower=True, check_finite=False)
    return -0.5 * float(z @ z) - float(np.sum(np.log(np.diag(chol)))) - 0.5 * len(y) * _LOG_2PI


def lml_grid(sqd, y, length_scales, signal_vars, noise, jitter0=1e-8, jitter_max=1e-2):
    """Log marginal likelihood of zero-mean ``y`` on a hyperparameter grid.

    Entry ``[i, j]`` uses an RBF kernel with ``length_scales[i]`` and
    ``signal_vars[j]`` plus ``noise`` on the diagonal. Failed factorizations
    give ``-inf``.
    """
    sqd = np.asarray(sqd, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = sqd.shape[0]
    out = np.full((len(length_scales), len(signal_vars)), -np.inf)
    eye = np.eye(n)
    for i, ls in enumerate(length_scales):
        corr = np.exp(-0.5 * sqd / (ls * ls))
        for j, sv in enumerate(signal_vars):
            try:
                chol, _ = cholesky_jitter(sv * corr + noise * eye, jitter0, jitter_max)
            except np.linalg.LinAlgError:
                continue
            out[i, j] = _lml_from_chol(chol, y)
    return out


def revenue_grid_argmax(alpha, beta, theta, p, q, capacity_f, lo, hi, resolution):
    """Scan client revenue on ``lo, lo + res, ...`` plus ``hi``; first maximum wins."""
    count = int(math.floor((hi - lo) / resolution + 1e-9)) + 1
    grid = np.minimum(lo + resolution * np.arange(count, dtype=np.float64), hi)
    if grid[-1] < hi:
        grid = np.append(grid, hi)
    rev = alpha * -np.expm1(-beta * grid) - theta * (p * grid + q) / capacity_f
    k = int(np.argmax(rev))
    return float(grid[k]), float(rev[k])
