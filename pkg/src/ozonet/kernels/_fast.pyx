# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: ECDF sup distance and window moments.

Must stay numerically identical to ozonet.kernels._pure — both count
points around each pooled breakpoint and divide by (n + 1) in double
precision, so the sup distance matches bit-for-bit.
"""

import numpy as np

from libc.math cimport fabs


def ks_distance(a, b):
    """Sup distance between two ECDFs, each normalised by 1/(n+1)."""
    cdef double[::1] av = np.sort(np.ascontiguousarray(a, dtype=np.float64))
    cdef double[::1] bv = np.sort(np.ascontiguousarray(b, dtype=np.float64))
    cdef Py_ssize_t m = av.shape[0]
    cdef Py_ssize_t n = bv.shape[0]
    if m == 0 or n == 0:
        raise ValueError("samples must be non-empty")

    cdef double inv_m = m + 1.0
    cdef double inv_n = n + 1.0
    cdef Py_ssize_t i = 0, j = 0
    cdef double d = 0.0, diff, v

    # Walk pooled breakpoints; i and j count points strictly below the
    # current value (left limit), then at-or-below it (right limit).
    while i < m or j < n:
        if i < m and (j >= n or av[i] <= bv[j]):
            v = av[i]
        else:
            v = bv[j]
        diff = fabs(i / inv_m - j / inv_n)
        if diff > d:
            d = diff
        while i < m and av[i] == v:
            i += 1
        while j < n and bv[j] == v:
            j += 1
        diff = fabs(i / inv_m - j / inv_n)
        if diff > d:
            d = diff
    return d


def window_moments(x):
    """(mean, unbiased variance) of a window sample; variance 0.0 when n < 2."""
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    if n == 0:
        raise ValueError("sample must be non-empty")
    cdef Py_ssize_t i
    cdef double total = 0.0
    for i in range(n):
        total += xv[i]
    cdef double mean = total / n
    if n < 2:
        return mean, 0.0
    cdef double ss = 0.0, dev
    for i in range(n):
        dev = xv[i] - mean
        ss += dev * dev
    return mean, ss / (n - 1)
