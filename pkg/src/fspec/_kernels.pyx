# cython: language_level=3
"""Compiled separable torus sums."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef extern from "_simd.h":
    double fspec_row_sum1(const double *x, const double *w, Py_ssize_t n, double a) nogil
    double fspec_row_sum2(const double *x, const double *w, Py_ssize_t n, double a) nogil


def separable_sum(a, wa, b, wb, c, wc, double z, int power=1):
    """Sum of wa_i wb_j wc_l / (a_i + b_j + c_l - z)**power over all i, j, l."""
    if power != 1 and power != 2:
        raise ValueError("power must be 1 or 2")
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] wav = np.ascontiguousarray(wa, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    cdef double[::1] bc = np.ascontiguousarray((b[:, None] + (c[None, :] - z)).ravel())
    cdef double[::1] wbc = np.ascontiguousarray(
        (np.asarray(wb, dtype=np.float64)[:, None] * np.asarray(wc, dtype=np.float64)[None, :]).ravel()
    )
    cdef Py_ssize_t na = av.shape[0]
    cdef Py_ssize_t n = bc.shape[0]
    cdef Py_ssize_t i
    cdef double total = 0.0
    if na == 0 or n == 0:
        return 0.0
    with nogil:
        for i in range(na):
            if power == 1:
                total += wav[i] * fspec_row_sum1(&bc[0], &wbc[0], n, av[i])
            else:
                total += wav[i] * fspec_row_sum2(&bc[0], &wbc[0], n, av[i])
    return total
