# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled CSR kernels: matrix-vector and matrix-block products.

These are the hot inner loops of the iteration engine; a numpy/scipy
fallback with the same signatures lives in ``_kernels_np``.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def csr_matvec(cnp.int64_t[::1] row_ptr,
               cnp.int64_t[::1] col_idx,
               double[::1] values,
               double[::1] x):
    cdef Py_ssize_t n = row_ptr.shape[0] - 1
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef double[::1] y = out
    cdef Py_ssize_t i, k
    cdef double acc
    for i in range(n):
        acc = 0.0
        for k in range(row_ptr[i], row_ptr[i + 1]):
            acc += values[k] * x[col_idx[k]]
        y[i] = acc
    return out


def csr_matmat(cnp.int64_t[::1] row_ptr,
               cnp.int64_t[::1] col_idx,
               double[::1] values,
               double[:, ::1] X):
    cdef Py_ssize_t n = row_ptr.shape[0] - 1
    cdef Py_ssize_t r = X.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((n, r), dtype=np.float64)
    cdef double[:, ::1] Y = out
    cdef Py_ssize_t i, k, j, c
    cdef double v
    for i in range(n):
        for k in range(row_ptr[i], row_ptr[i + 1]):
            c = col_idx[k]
            v = values[k]
            for j in range(r):
                Y[i, j] += v * X[c, j]
    return out
