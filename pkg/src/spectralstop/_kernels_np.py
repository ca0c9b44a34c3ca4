"""Fallback CSR kernels backed by scipy.sparse.

Same signatures as the compiled ``_kernels`` extension; selected at import
time by :mod:`spectralstop.kernels` when the extension is unavailable.
"""

import numpy as np
import scipy.sparse as sp


def _as_csr(row_ptr, col_idx, values):
    n = len(row_ptr) - 1
    return sp.csr_matrix((values, col_idx, row_ptr), shape=(n, n))


def csr_matvec(row_ptr, col_idx, values, x):
    return _as_csr(row_ptr, col_idx, values) @ np.asarray(x, dtype=np.float64)


def csr_matmat(row_ptr, col_idx, values, X):
    out = _as_csr(row_ptr, col_idx, values) @ np.asarray(X, dtype=np.float64)
    return np.ascontiguousarray(out)
