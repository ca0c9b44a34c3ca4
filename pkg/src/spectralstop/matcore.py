"""Matrix primitives: row-wise norms, subspace distances, QR, SVD, Procrustes.

Everything operates on float64 numpy arrays.  Orthonormal blocks are plain
``(n, r)`` arrays; ``check_orthonormal`` enforces the Gram-matrix invariant
where a contract requires it.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from spectralstop import kernels

ORTHO_TOL = 1e-10
RANK_TOL = 1e-12

# Fixed seed for the power-iteration route of spectral_norm.
_POWER_SEED = 0x5EED
# Below this dimension spectral_norm just calls a dense SVD.
_DENSE_SVD_CUTOFF = 200


class RankDeficiencyError(ValueError):
    """Numerically rank-deficient input where full column rank is required."""


class PowerIterationError(RuntimeError):
    """Power iteration did not converge; carries the last estimate."""

    def __init__(self, msg, estimate):
        super().__init__(msg)
        self.estimate = estimate


@dataclass(frozen=True)
class SparseSymMatrix:
    """Symmetric sparse operator in CSR form.

    The constructor verifies structural symmetry: every stored ``(i, j, v)``
    must have a matching ``(j, i, v)``.
    """

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        rp = np.asarray(self.row_ptr, dtype=np.int64)
        ci = np.asarray(self.col_idx, dtype=np.int64)
        vals = np.asarray(self.values, dtype=np.float64)
        if len(rp) != self.n + 1:
            raise ValueError("row_ptr must have length n + 1")
        if np.any(np.diff(rp) < 0):
            raise ValueError("row_ptr must be nondecreasing")
        if len(ci) and (ci.min() < 0 or ci.max() >= self.n):
            raise ValueError("col_idx entries out of range")
        object.__setattr__(self, "row_ptr", np.ascontiguousarray(rp))
        object.__setattr__(self, "col_idx", np.ascontiguousarray(ci))
        object.__setattr__(self, "values", np.ascontiguousarray(vals))
        M = sp.csr_matrix((self.values, self.col_idx, self.row_ptr),
                          shape=(self.n, self.n))
        diff = abs(M - M.T)
        if diff.nnz and diff.max() > 0:
            raise ValueError("matrix is not symmetric")

    @classmethod
    def from_scipy(cls, M):
        M = sp.csr_matrix(M).astype(np.float64)
        M.sort_indices()
        return cls(M.shape[0], M.indptr.astype(np.int64),
                   M.indices.astype(np.int64), M.data)

    @classmethod
    def from_dense(cls, A):
        return cls.from_scipy(sp.csr_matrix(np.asarray(A, dtype=np.float64)))

    @classmethod
    def from_edges(cls, n, edges, weight=1.0):
        """Build from an undirected edge list; each pair is stored both ways."""
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        rows = np.concatenate([edges[:, 0], edges[:, 1]])
        cols = np.concatenate([edges[:, 1], edges[:, 0]])
        data = np.full(len(rows), weight, dtype=np.float64)
        M = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        return cls.from_scipy(M)

    @property
    def shape(self):
        return (self.n, self.n)

    def matvec(self, x):
        x = np.ascontiguousarray(x, dtype=np.float64)
        return kernels.csr_matvec(self.row_ptr, self.col_idx, self.values, x)

    def matmat(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim == 1:
            return self.matvec(X)
        return kernels.csr_matmat(self.row_ptr, self.col_idx, self.values, X)

    def to_scipy(self):
        return sp.csr_matrix((self.values, self.col_idx, self.row_ptr),
                             shape=(self.n, self.n))

    def to_dense(self):
        return self.to_scipy().toarray()


def _require_nonempty(M):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.size == 0:
        raise ValueError("expected a nonempty 2-d matrix")
    return M


def check_orthonormal(Q, tol=ORTHO_TOL):
    """Raise if ``Q.T @ Q`` deviates from the identity by more than tol (max norm)."""
    Q = _require_nonempty(Q)
    G = Q.T @ Q
    dev = np.abs(G - np.eye(Q.shape[1])).max()
    if dev > tol:
        raise ValueError(f"block is not orthonormal: max deviation {dev:.3e}")
    return Q


def two_to_inf_norm(M):
    """Largest row 2-norm of ``M``."""
    M = _require_nonempty(M)
    return float(np.sqrt((M * M).sum(axis=1).max()))


def inf_op_norm(M):
    """Largest absolute row sum of ``M``."""
    M = _require_nonempty(M)
    return float(np.abs(M).sum(axis=1).max())


def power_spectral_norm(matvec, rmatvec, n_cols, tol, max_iters, seed=_POWER_SEED):
    """Largest singular value via power iteration on ``M.T @ M``.

    ``matvec``/``rmatvec`` apply ``M`` and ``M.T``; deterministic start from
    the given seed.  Raises :class:`PowerIterationError` on non-convergence,
    carrying the last estimate.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    x = rng.standard_normal(n_cols)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(max_iters):
        y = rmatvec(matvec(x))
        norm_y = np.linalg.norm(y)
        if norm_y == 0.0:
            return 0.0
        new_est = np.sqrt(norm_y)
        x = y / norm_y
        if abs(new_est - est) <= tol * max(new_est, 1e-300):
            return float(new_est)
        est = new_est
    raise PowerIterationError(
        f"power iteration did not converge in {max_iters} iterations", est)


def spectral_norm(M, tol=1e-10):
    """Largest singular value of a dense matrix or abstract operator.

    Dense inputs with min dimension <= 200 go through a full SVD; larger
    ones use seeded power iteration with an iteration cap of ``10 * n``.
    Operators must expose ``shape`` and ``matvec``/``matmat``; symmetric
    operators reuse ``matvec`` for the transpose.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if isinstance(M, np.ndarray):
        M = _require_nonempty(M)
        if min(M.shape) <= _DENSE_SVD_CUTOFF:
            return float(np.linalg.svd(M, compute_uv=False)[0])
        n = M.shape[1]
        return power_spectral_norm(lambda x: M @ x, lambda y: M.T @ y,
                                   n, tol, 10 * max(M.shape))
    n = M.shape[1]
    return power_spectral_norm(M.matvec, M.matvec, n, tol, 10 * max(M.shape))


def thin_qr(M):
    """Thin QR with the R diagonal normalized to be nonnegative.

    Uses LAPACK's Householder factorization, then flips signs so that
    ``diag(R) >= 0``, making the output deterministic.  Raises
    :class:`RankDeficiencyError` when a diagonal entry of R falls below
    ``1e-12 * ||M||_F``.
    """
    M = _require_nonempty(M)
    n, r = M.shape
    if n < r:
        raise ValueError("need n >= r for a thin QR")
    Q, R = np.linalg.qr(M)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    Q = Q * signs
    R = R * signs[:, None]
    if np.abs(np.diag(R)).min() < RANK_TOL * np.linalg.norm(M):
        raise RankDeficiencyError("input is numerically rank deficient")
    return Q, R


def small_svd(M):
    """Full SVD ``M = U @ diag(s) @ W.T`` of a small square matrix.

    Singular values come back nonnegative and descending.
    """
    M = _require_nonempty(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("small_svd expects a square matrix")
    if M.shape[0] > 200:
        raise ValueError("small_svd is limited to r <= 200")
    U, s, Wt = np.linalg.svd(M)
    return U, s, Wt.T


def procrustes_align(Vhat, V):
    """Orthogonal matrix Z minimizing ``||Vhat - V @ Z||_F``.

    Z = U @ W.T from the SVD of ``V.T @ Vhat``.
    """
    Vhat = np.asarray(Vhat, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    if Vhat.shape != V.shape:
        raise ValueError("blocks must have identical shapes")
    U, _, W = small_svd(V.T @ Vhat)
    return U @ W.T


def dist_2(Q, V):
    """Spectral-norm distance between the subspaces spanned by Q and V.

    Computed as ``sqrt(1 - sigma_min(V.T Q)^2)``; never forms n x n
    projectors.
    """
    Q = np.asarray(Q, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    if Q.shape != V.shape:
        raise ValueError("blocks must have identical shapes")
    _, s, _ = small_svd(V.T @ Q)
    smin = s[-1]
    return float(np.sqrt(max(0.0, 1.0 - min(1.0, smin) ** 2)))


def dist_2inf_proxy(Q, V):
    """Row-wise distance proxy ``||Q - V @ Z_F||_{2->inf}``.

    ``Z_F`` is the Frobenius-optimal rotation from :func:`procrustes_align`;
    the value upper-bounds the rotation-minimized row-wise distance.
    """
    Z = procrustes_align(Q, V)
    return two_to_inf_norm(np.asarray(Q, dtype=np.float64) - V @ Z)


def coherence(V):
    """Smallest mu with ``||V||_{2->inf} <= mu * sqrt(r / n)``."""
    V = check_orthonormal(V)
    n, r = V.shape
    return float(two_to_inf_norm(V) * np.sqrt(n / r))
