"""Compiled kernels: extremal level scans and the 7-point stencil matvec.

Signatures mirror leveldecay._kernels.pure; see that module for the contract.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log, INFINITY

cnp.import_array()

NAME = "compiled"


def extremal_scan_geom(double[::1] lk, double[::1] G, double[::1] row_add,
                       double[::1] col_add, double alpha, double beta,
                       double lphi0):
    cdef Py_ssize_t n = lk.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] lphi = out
    cdef double[::1] A = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double best, s, v
    lphi[0] = lphi0
    A[0] = beta * lphi0 + col_add[0] - alpha * lk[0]
    for i in range(1, n):
        best = INFINITY
        for j in range(i):
            s = A[j] - alpha * G[i - j]
            if s < best:
                best = s
        v = row_add[i] + best
        if lphi[i - 1] < v:
            v = lphi[i - 1]
        lphi[i] = v
        A[i] = beta * v + col_add[i] - alpha * lk[i]
    return out


cdef void _scan_rows(double[::1] levels, double[::1] lk, double[::1] lphi,
                     double[::1] A, double alpha, double beta, double lnc,
                     double thak, double thah, Py_ssize_t start) noexcept:
    cdef Py_ssize_t n = levels.shape[0]
    cdef Py_ssize_t i, j
    cdef double best, s, v, hi
    for i in range(start, n):
        hi = levels[i]
        best = INFINITY
        for j in range(i):
            s = A[j] - alpha * log(hi - levels[j])
            if s < best:
                best = s
        v = lnc + thah * lk[i] + best
        if lphi[i - 1] < v:
            v = lphi[i - 1]
        lphi[i] = v
        A[i] = beta * v + thak * lk[i]


def extremal_scan_continue(double[::1] levels, double[::1] lk,
                           double[::1] lphi, double[::1] A, double alpha,
                           double beta, double lnc, double thak, double thah,
                           Py_ssize_t start):
    _scan_rows(levels, lk, lphi, A, alpha, beta, lnc, thak, thah, start)
    return None


def extremal_scan_generic(double[::1] levels, double alpha, double beta,
                          double lnc, double thak, double thah, double lphi0):
    cdef Py_ssize_t n = levels.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] lphi = out
    cdef double[::1] A = np.empty(n, dtype=np.float64)
    cdef double[::1] lk = np.log(np.asarray(levels))
    lphi[0] = lphi0
    A[0] = beta * lphi0 + thak * lk[0]
    _scan_rows(levels, lk, lphi, A, alpha, beta, lnc, thak, thah, 1)
    return out


def stencil_apply(double[:, :, ::1] ax, double[:, :, ::1] ay,
                  double[:, :, ::1] az, double[:, :, ::1] x,
                  double[:, :, ::1] out, double inv_h2):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(n):
        for j in range(n):
            for k in range(n):
                acc = (ax[i, j, k] + ax[i + 1, j, k]
                       + ay[i, j, k] + ay[i, j + 1, k]
                       + az[i, j, k] + az[i, j, k + 1]) * x[i, j, k]
                if i > 0:
                    acc -= ax[i, j, k] * x[i - 1, j, k]
                if i < n - 1:
                    acc -= ax[i + 1, j, k] * x[i + 1, j, k]
                if j > 0:
                    acc -= ay[i, j, k] * x[i, j - 1, k]
                if j < n - 1:
                    acc -= ay[i, j + 1, k] * x[i, j + 1, k]
                if k > 0:
                    acc -= az[i, j, k] * x[i, j, k - 1]
                if k < n - 1:
                    acc -= az[i, j, k + 1] * x[i, j, k + 1]
                out[i, j, k] = acc * inv_h2
    return None
