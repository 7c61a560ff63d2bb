# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pool-adjacent-violators kernel.

Mirrors ``_pava_py.pava`` exactly; the two implementations are compared in
``benchmarks/bench_kernels.py`` and in the test suite.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def pava(const double[::1] values, const double[::1] weights):
    """Nondecreasing weighted least-squares isotonic fit.

    Stack-based pooling, O(n). Adjacent blocks with equal pooled means are
    merged (the `>=` test), giving a canonical block structure.
    """
    cdef Py_ssize_t n = values.shape[0]
    fitted_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] fitted = fitted_arr
    if n == 0:
        return fitted_arr

    mean_arr = np.empty(n, dtype=np.float64)
    weight_arr = np.empty(n, dtype=np.float64)
    start_arr = np.empty(n, dtype=np.intp)
    cdef double[::1] bmean = mean_arr
    cdef double[::1] bweight = weight_arr
    cdef Py_ssize_t[::1] bstart = start_arr

    cdef Py_ssize_t top = -1
    cdef Py_ssize_t i, j, stop
    cdef double w

    for i in range(n):
        top += 1
        bmean[top] = values[i]
        bweight[top] = weights[i]
        bstart[top] = i
        while top > 0 and bmean[top - 1] >= bmean[top]:
            w = bweight[top - 1] + bweight[top]
            bmean[top - 1] += (bmean[top] - bmean[top - 1]) * (bweight[top] / w)
            bweight[top - 1] = w
            top -= 1

    stop = n
    for j in range(top, -1, -1):
        for i in range(bstart[j], stop):
            fitted[i] = bmean[j]
        stop = bstart[j]
    return fitted_arr
