# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pool-adjacent-violators kernels.

Both entry points mirror ``icvcdf._pava_py`` exactly; the pure-Python module
is used when this extension is not built.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef void _pava_line(const double* z, const double* w, double* out,
                     Py_ssize_t n, bint increasing,
                     double* mean, double* wsum, Py_ssize_t* start) noexcept nogil:
    cdef Py_ssize_t i, j, b = 0
    cdef double m, ww
    for i in range(n):
        mean[b] = z[i]
        wsum[b] = w[i]
        start[b] = i
        b += 1
        while b > 1:
            if increasing:
                if not (mean[b - 2] > mean[b - 1]):
                    break
            else:
                if not (mean[b - 2] < mean[b - 1]):
                    break
            ww = wsum[b - 2] + wsum[b - 1]
            m = (wsum[b - 2] * mean[b - 2] + wsum[b - 1] * mean[b - 1]) / ww
            mean[b - 2] = m
            wsum[b - 2] = ww
            b -= 1
    start[b] = n
    # recompute each pooled block's mean in one extended-precision pass so the
    # result does not depend on the order in which the block was merged
    cdef long double acc, wacc
    cdef double prev = 0.0
    for j in range(b):
        if start[j + 1] - start[j] > 1:
            acc = 0.0
            wacc = 0.0
            for i in range(start[j], start[j + 1]):
                acc += <long double> (w[i] * z[i])
                wacc += w[i]
            m = (<double> acc) / (<double> wacc)
        else:
            m = mean[j]
        # adjacent blocks can be tied up to rounding; keep the output monotone
        if j > 0 and (m < prev if increasing else m > prev):
            m = prev
        prev = m
        for i in range(start[j], start[j + 1]):
            out[i] = m


def pava(double[::1] values, double[::1] weights, bint increasing):
    """Weighted isotonic (or antitonic) regression of a single sequence."""
    cdef Py_ssize_t n = values.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    if n == 0:
        return out
    cdef double* mean = <double*> malloc(n * sizeof(double))
    cdef double* wsum = <double*> malloc(n * sizeof(double))
    cdef Py_ssize_t* start = <Py_ssize_t*> malloc((n + 1) * sizeof(Py_ssize_t))
    if mean == NULL or wsum == NULL or start == NULL:
        free(mean); free(wsum); free(start)
        raise MemoryError()
    with nogil:
        _pava_line(&values[0], &weights[0], &o[0], n, increasing, mean, wsum, start)
    free(mean); free(wsum); free(start)
    return out


def pava_rows(double[:, ::1] values, double[::1] weights, bint increasing):
    """Row-wise PAVA on a C-contiguous matrix sharing one weight vector."""
    cdef Py_ssize_t r = values.shape[0], n = values.shape[1], i
    out = np.empty((r, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    if r == 0 or n == 0:
        return out
    cdef double* mean = <double*> malloc(n * sizeof(double))
    cdef double* wsum = <double*> malloc(n * sizeof(double))
    cdef Py_ssize_t* start = <Py_ssize_t*> malloc((n + 1) * sizeof(Py_ssize_t))
    if mean == NULL or wsum == NULL or start == NULL:
        free(mean); free(wsum); free(start)
        raise MemoryError()
    with nogil:
        for i in range(r):
            _pava_line(&values[i, 0], &weights[0], &o[i, 0], n, increasing,
                       mean, wsum, start)
    free(mean); free(wsum); free(start)
    return out
