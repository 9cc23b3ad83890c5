# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same contract as ``_pykernels``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"

OPTIMAL, UNBOUNDED, ITERATION_LIMIT = 0, 1, 2


cdef inline double _det4_ones(double a0, double a1, double a2, double a3,
                              double b0, double b1, double b2, double b3,
                              double c0, double c1, double c2, double c3) nogil:
    return ((a0 * b1 - a1 * b0) * (c2 - c3)
            - (a0 * b2 - a2 * b0) * (c1 - c3)
            + (a0 * b3 - a3 * b0) * (c1 - c2)
            + (a1 * b2 - a2 * b1) * (c0 - c3)
            - (a1 * b3 - a3 * b1) * (c0 - c2)
            + (a2 * b3 - a3 * b2) * (c0 - c1))


def tau_batch(quartets, signs):
    cdef double[:, ::1] Q = np.ascontiguousarray(quartets, dtype=np.float64)
    cdef double[:, ::1] S = np.ascontiguousarray(signs, dtype=np.float64)
    cdef Py_ssize_t n = Q.shape[0], k = S.shape[0], i, j
    tau_arr = np.empty(n, dtype=np.float64)
    idx_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] tau = tau_arr
    cdef long long[::1] idx = idx_arr
    cdef double a_ep, b_ep, a_em, b_em, a_epp, b_epp, a_epm, b_epm
    cdef double p, q, r, s, d, best
    cdef long long best_j
    with nogil:
        for i in range(n):
            a_ep = Q[i, 0]; b_ep = Q[i, 1]; a_em = Q[i, 2]; b_em = Q[i, 3]
            a_epp = Q[i, 4]; b_epp = Q[i, 5]; a_epm = Q[i, 6]; b_epm = Q[i, 7]
            best = 0.0
            best_j = -1
            for j in range(k):
                p = S[j, 0]; q = S[j, 1]; r = S[j, 2]; s = S[j, 3]
                d = _det4_ones(a_ep, a_epp, a_epm, a_em,
                               b_ep, b_epp, b_epm, b_em,
                               p * a_ep + q * b_ep - 1.0,
                               r * a_epp + s * b_epp + 1.0,
                               -r * a_epm - s * b_epm + 1.0,
                               -p * a_em - q * b_em - 1.0)
                if best_j < 0 or d > best:
                    best = d
                    best_j = j
            tau[i] = best
            idx[i] = best_j
    return tau_arr, idx_arr


def ell_batch(quartets):
    cdef double[:, ::1] Q = np.ascontiguousarray(quartets, dtype=np.float64)
    cdef Py_ssize_t n = Q.shape[0], i
    ell_arr = np.empty(n, dtype=np.float64)
    c_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] ell = ell_arr
    cdef double[::1] cs = c_arr
    cdef double dec, inc, c, lo, hi
    with nogil:
        for i in range(n):
            dec = min(Q[i, 0] + Q[i, 1] - 1.0, -Q[i, 2] - Q[i, 3] - 1.0)
            inc = min(Q[i, 4] - Q[i, 5] - 1.0, -Q[i, 6] + Q[i, 7] - 1.0)
            c = (dec - inc) / 2.0
            if c > 1.0:
                c = 1.0
            elif c < -1.0:
                c = -1.0
            lo = dec - c
            hi = inc + c
            ell[i] = lo if lo < hi else hi
            cs[i] = c
    return ell_arr, c_arr


cdef void _pivot(double[:, ::1] T, Py_ssize_t row, Py_ssize_t col) nogil:
    cdef Py_ssize_t nr = T.shape[0], nc = T.shape[1], i, j
    cdef double piv = T[row, col], f
    for j in range(nc):
        T[row, j] /= piv
    for i in range(nr):
        if i == row:
            continue
        f = T[i, col]
        if f != 0.0:
            for j in range(nc):
                T[i, j] -= f * T[row, j]


def pivot(T, Py_ssize_t row, Py_ssize_t col):
    cdef double[:, ::1] tv = T
    _pivot(tv, row, col)


def simplex_iterate(T, basis, Py_ssize_t n_enter, double tol, Py_ssize_t max_iter):
    cdef double[:, ::1] tv = T
    cdef long long[::1] bv = basis
    cdef Py_ssize_t m = tv.shape[0] - 1, last = tv.shape[1] - 1
    cdef Py_ssize_t it, j, i, col, best_row
    cdef double ratio, best_ratio
    for it in range(max_iter):
        col = -1
        for j in range(n_enter):
            if tv[m, j] < -tol:
                col = j
                break
        if col < 0:
            return OPTIMAL, it
        best_row = -1
        best_ratio = 0.0
        for i in range(m):
            if tv[i, col] > tol:
                ratio = tv[i, last] / tv[i, col]
                if best_row < 0 or ratio < best_ratio - tol or (
                        ratio <= best_ratio + tol and bv[i] < bv[best_row]):
                    best_ratio = ratio
                    best_row = i
        if best_row < 0:
            return UNBOUNDED, it
        _pivot(tv, best_row, col)
        bv[best_row] = col
    return ITERATION_LIMIT, max_iter
