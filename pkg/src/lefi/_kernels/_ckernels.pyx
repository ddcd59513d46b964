# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_pykernels``.

Same signatures and semantics; the factorizations call LAPACK ``dpotrf``
through scipy so the only thing removed is Python-level overhead.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, M_PI
from scipy.linalg.cython_lapack cimport dpotrf

cnp.import_array()


def sq_dists(a, b):
    cdef double[:, ::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = av.shape[0], m = bv.shape[0], dim = av.shape[1]
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, j, k
    cdef double s, t
    for i in range(n):
        for j in range(m):
            s = 0.0
            for k in range(dim):
                t = av[i, k] - bv[j, k]
                s += t * t
            ov[i, j] = s
    return out


cdef int _potrf_lower(double[:, ::1] a) noexcept nogil:
    # Row-major lower factor == column-major upper factor of a symmetric matrix.
    cdef char uplo = b'U'
    cdef int n = <int>a.shape[0]
    cdef int info = 0
    dpotrf(&uplo, &n, &a[0, 0], &n, &info)
    return info


cdef int _factor_jitter(double[:, ::1] src, double[:, ::1] work,
                        double jitter0, double jitter_max, double* used) noexcept nogil:
    cdef Py_ssize_t n = src.shape[0], i, j
    cdef double jitter = 0.0
    while True:
        for i in range(n):
            for j in range(n):
                work[i, j] = src[i, j]
            work[i, i] += jitter
        if _potrf_lower(work) == 0:
            used[0] = jitter
            return 0
        if jitter == 0.0:
            jitter = jitter0
        else:
            jitter = jitter * 10.0
        if jitter > jitter_max * (1 + 1e-9):
            return 1


def cholesky_jitter(k, double jitter0=1e-8, double jitter_max=1e-2):
    cdef double[:, ::1] src = np.ascontiguousarray(k, dtype=np.float64)
    cdef Py_ssize_t n = src.shape[0], i, j
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] work = out
    cdef double used = 0.0
    if _factor_jitter(src, work, jitter0, jitter_max, &used) != 0:
        raise np.linalg.LinAlgError("Matrix is not positive definite")
    for i in range(n):
        for j in range(i + 1, n):
            work[i, j] = 0.0
    return out, used


cdef double _lml_lower(double[:, ::1] chol, const double[::1] y, double[::1] z) noexcept nogil:
    cdef Py_ssize_t n = chol.shape[0], i, j
    cdef double s, quad = 0.0, logdet = 0.0
    for i in range(n):
        s = y[i]
        for j in range(i):
            s -= chol[i, j] * z[j]
        z[i] = s / chol[i, i]
        quad += z[i] * z[i]
        logdet += log(chol[i, i])
    return -0.5 * quad - logdet - 0.5 * n * log(2.0 * M_PI)


def lml_grid(sqd, y, length_scales, signal_vars, double noise,
             double jitter0=1e-8, double jitter_max=1e-2):
    cdef double[:, ::1] d2 = np.ascontiguousarray(sqd, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef const double[::1] ls = np.ascontiguousarray(length_scales, dtype=np.float64)
    cdef const double[::1] sv = np.ascontiguousarray(signal_vars, dtype=np.float64)
    cdef Py_ssize_t n = d2.shape[0], nl = ls.shape[0], ns = sv.shape[0]
    out = np.full((nl, ns), -np.inf)
    cdef double[:, ::1] ov = out
    cdef double[:, ::1] corr = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] kmat = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] work = np.empty((n, n), dtype=np.float64)
    cdef double[::1] z = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t a, b, i, j
    cdef double inv, used
    with nogil:
        for a in range(nl):
            inv = 1.0 / (ls[a] * ls[a])
            for i in range(n):
                for j in range(n):
                    corr[i, j] = exp(-0.5 * d2[i, j] * inv)
            for b in range(ns):
                for i in range(n):
                    for j in range(n):
                        kmat[i, j] = sv[b] * corr[i, j]
                    kmat[i, i] += noise
                if _factor_jitter(kmat, work, jitter0, jitter_max, &used) != 0:
                    continue
                ov[a, b] = _lml_lower(work, yv, z)
    return out


# A scalar expm1 loop loses to NumPy's vectorized pass over the grid (see
# benchmarks/bench_kernels.py), so the oracle scan is shared with the fallback.
from lefi._kernels._pykernels import revenue_grid_argmax
