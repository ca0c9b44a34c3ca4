"""Executable convergence-rate bounds and empirical diagnostics.

All rates consume a :class:`GroundTruth` snapshot taken at the start of a
run (exact leading eigenvectors, spectrum, coherence, initial distances)
and return the bound value at iteration t.  The ``2->inf`` initial distance
is the Procrustes proxy throughout, since the rotation-minimized distance
has no closed form.
"""

from dataclasses import dataclass

import numpy as np

from spectralstop import matcore

# Absolute truncation threshold for the spectral route of the assumption
# verifier; the induced error in C is below n^{3/2} * _TRUNC_TOL.
_TRUNC_TOL = 1e-15


class InsufficientSpectrumError(ValueError):
    """The stored spectrum is too short for the requested bound."""


@dataclass
class GroundTruth:
    V: np.ndarray                 # exact leading eigenvectors, n x r
    eigenvalues: np.ndarray       # descending; at least r+2 entries for rate2
    mu: float                     # coherence of V
    d0: float                     # dist_2(Q0, V)
    dist2inf0: float              # Procrustes-proxy dist(Q0, V)
    C_assumption: float | None = None
    v_r1_outer_inf: float | None = None  # ||v_{r+1} v_{r+1}^T||_inf

    @property
    def n(self):
        return self.V.shape[0]

    @property
    def r(self):
        return self.V.shape[1]

    def _lam(self, k):
        if len(self.eigenvalues) <= k:
            raise InsufficientSpectrumError(
                f"need eigenvalue index {k}, have {len(self.eigenvalues)}")
        return float(self.eigenvalues[k])

    @property
    def tan_theta0(self):
        if self.d0 >= 1.0:
            raise ValueError("degenerate start: d0 = 1")
        return self.d0 / np.sqrt(1.0 - self.d0 ** 2)


def measure_ground_truth(V, eigenvalues, Q0, C_assumption=None,
                         v_r1=None):
    """Assemble a :class:`GroundTruth` from exact eigenpairs and the start block.

    ``Q0`` may be wider than V; only its leading r columns enter the
    distances.  ``v_r1`` is the (r+1)-th eigenvector, used by rate2.
    """
    V = np.asarray(V, dtype=np.float64)
    r = V.shape[1]
    Q0r = np.asarray(Q0, dtype=np.float64)[:, :r]
    outer_inf = None
    if v_r1 is not None:
        v = np.asarray(v_r1, dtype=np.float64).ravel()
        # ||v v^T||_inf = max_i |v_i| * ||v||_1, without forming n x n
        outer_inf = float(np.abs(v).max() * np.abs(v).sum())
    return GroundTruth(
        V=V,
        eigenvalues=np.asarray(eigenvalues, dtype=np.float64),
        mu=matcore.coherence(V),
        d0=matcore.dist_2(Q0r, V),
        dist2inf0=matcore.dist_2inf_proxy(Q0r, V),
        C_assumption=C_assumption,
        v_r1_outer_inf=outer_inf,
    )


def rate_naive(gt, t):
    """Classical spectral-norm rate ``(lam_{r+1}/lam_r)^t d0 / sqrt(1 - d0^2)``."""
    ratio = gt._lam(gt.r) / gt._lam(gt.r - 1)
    return ratio ** t * gt.tan_theta0


def rate1(gt, t):
    """Idealized row-wise rate: the naive rate seeded with the 2->inf distance."""
    ratio = gt._lam(gt.r) / gt._lam(gt.r - 1)
    denom = np.sqrt(1.0 - gt.d0 ** 2)
    return ratio ** t * gt.dist2inf0 / denom


def rate2(gt, t):
    """Two-rate bound splitting off the (r+1)-th eigendirection.

    Requires ``lam_{r+2}`` and the outer-product infinity norm of the
    (r+1)-th eigenvector.
    """
    if gt.v_r1_outer_inf is None:
        raise InsufficientSpectrumError("rate2 needs the (r+1)-th eigenvector")
    r = gt.r
    lam_r, lam_r1, lam_r2 = gt._lam(r - 1), gt._lam(r), gt._lam(r + 1)
    denom = np.sqrt(1.0 - gt.d0 ** 2)
    bracket = (gt.mu * np.sqrt(2.0 * r / gt.n) * gt.d0 / denom
               + gt.v_r1_outer_inf / denom * gt.dist2inf0)
    return (lam_r1 / lam_r) ** t * bracket + (lam_r2 / lam_r) ** t * gt.d0 / denom


def rate3(gt, t):
    """Single-rate bound under the tail-power assumption with measured C."""
    if gt.C_assumption is None:
        raise ValueError("rate3 needs a measured or configured C")
    r = gt.r
    lam_r, lam_r1 = gt._lam(r - 1), gt._lam(r)
    denom = np.sqrt(1.0 - gt.d0 ** 2)
    bracket = (gt.mu * np.sqrt(2.0 * r / gt.n) * gt.d0 / denom
               + gt.C_assumption * (1.0 + gt.mu * np.sqrt(r)) / denom
               * gt.dist2inf0)
    return (lam_r1 / lam_r) ** t * bracket


def rate_noassumption(gt, t):
    """Assumption-free three-term bound; needs ``lam_{r+2}`` and ``lam_n``."""
    r = gt.r
    if len(gt.eigenvalues) < gt.n:
        raise InsufficientSpectrumError("rate_noassumption needs the full spectrum")
    lam_r, lam_r1, lam_r2 = gt._lam(r - 1), gt._lam(r), gt._lam(r + 1)
    lam_n = gt._lam(gt.n - 1)
    denom = np.sqrt(1.0 - gt.d0 ** 2)
    tan0 = gt.tan_theta0
    term1 = (3.0 * (1.0 + gt.mu * np.sqrt(r)) / denom
             * (lam_r2 / lam_r) ** t * gt.dist2inf0)
    term2 = gt.mu * np.sqrt(r / gt.n) * (lam_r1 / lam_r) ** t * tan0
    # evaluated through eigenvalue ratios so large t cannot overflow
    term3 = max((lam_r1 / lam_r) ** t - (lam_r2 / lam_r) ** t,
                (lam_r2 / lam_r) ** t - (lam_n / lam_r) ** t) * tan0
    return term1 + term2 + term3


def corollary_bound(mu, r, n, eps1, eps2, lambda_gap, gap):
    """Row-wise error bound under coherence, from the residual norm levels.

    ``8 mu sqrt(r/n) (eps1/lambda_gap)^2
    + 2 (1 + mu sqrt(r)) / gap * (eps2 + 2 eps1 eps2 / lambda_gap)``
    """
    if gap <= 0 or lambda_gap <= 0:
        raise ValueError("gaps must be positive")
    return (8.0 * mu * np.sqrt(r / n) * (eps1 / lambda_gap) ** 2
            + 2.0 * (1.0 + mu * np.sqrt(r)) / gap
            * (eps2 + 2.0 * eps1 * eps2 / lambda_gap))


def proposition32_bound(V2inf, Vperp_inf, E2, E2inf, lambda_gap, gap):
    """Row-wise error bound from residual norms, without coherence substitutions.

    Returns ``(value, precondition_ok)`` where the flag records whether
    ``||E||_2 <= gap / 5`` held.
    """
    if gap <= 0 or lambda_gap <= 0:
        raise ValueError("gaps must be positive")
    value = (8.0 * V2inf * (E2 / lambda_gap) ** 2
             + 2.0 * Vperp_inf * (E2inf / gap) * (1.0 + 2.0 * E2 / lambda_gap))
    return value, E2 <= gap / 5.0


def complement_inf_norm(V):
    """``||I - V V^T||_inf`` computed row-block-wise, never forming n x n."""
    V = np.asarray(V, dtype=np.float64)
    n = V.shape[0]
    best = 0.0
    step = max(1, 10_000_000 // max(n, 1))
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        blk = -V[lo:hi] @ V.T
        blk[np.arange(lo, hi) - lo, np.arange(lo, hi)] += 1.0
        best = max(best, float(np.abs(blk).sum(axis=1).max()))
    return best


def tail_assumption_constant(W, eigenvalues, r, T_max=500):
    """Assumption constant from a full eigendecomposition ``A = W diag(lam) W^T``.

    Evaluates ``||W_perp diag((lam_k/lam_{r+1})^t) W_perp^T||_inf`` for
    t = 1..T_max with adaptive truncation of negligibly scaled tail columns
    and returns the supremum ratio against ``||I - V V^T||_inf``.
    """
    W = np.asarray(W, dtype=np.float64)
    lam = np.asarray(eigenvalues, dtype=np.float64)
    n = W.shape[0]
    lam_r1 = lam[r]
    if lam_r1 <= 0:
        raise ValueError("assumption verification needs lambda_{r+1} > 0")
    denom = complement_inf_norm(W[:, :r])
    tail = W[:, r:]
    ratios = lam[r:] / lam_r1          # |ratios| <= 1 under the magnitude ordering
    C = 0.0
    for t in range(1, T_max + 1):
        scales = ratios ** t
        active = np.abs(scales) > _TRUNC_TOL
        Wa = tail[:, active]
        sa = scales[active]
        num = 0.0
        step = max(1, 4_000_000 // max(n, 1))
        for lo in range(0, n, step):
            blk = (Wa[lo:lo + step] * sa) @ Wa.T
            num = max(num, float(np.abs(blk).sum(axis=1).max()))
        C = max(C, num / denom)
    return C


def verify_assumption1(A, V, eigenvalues, T_max=500, max_dense_n=12000):
    """Assumption constant from the operator and its leading r+1 eigenpairs.

    Computes ``C = sup_t ||A^t - V Lam^t V^T||_inf / (lam_{r+1}^t ||I - V V^T||_inf)``
    by maintaining the scaled deflated power ``P_t = (I - VV^T) A P_{t-1} / lam_{r+1}``
    (equal to ``(A^t - V Lam^t V^T) / lam_{r+1}^t`` when V holds exact
    eigenvectors).  Re-deflating every step keeps round-off in the leading
    directions from being amplified by ``(lam_1 / lam_{r+1})^t``.
    """
    V = np.asarray(V, dtype=np.float64)
    lam = np.asarray(eigenvalues, dtype=np.float64)
    n, r = V.shape
    if len(lam) < r + 1:
        raise InsufficientSpectrumError("need the leading r + 1 eigenvalues")
    lam_r1 = float(lam[r])
    if lam_r1 <= 0:
        raise ValueError("assumption verification needs lambda_{r+1} > 0")
    if n > max_dense_n:
        raise ValueError(
            f"dense power route capped at n = {max_dense_n}; "
            "use tail_assumption_constant with a full eigendecomposition")
    denom = complement_inf_norm(V)
    P = np.eye(n)
    C = 0.0
    for t in range(1, T_max + 1):
        P = A.matmat(P) / lam_r1 if hasattr(A, "matmat") else (A @ P) / lam_r1
        P -= V @ (V.T @ P)
        num = float(np.abs(P).sum(axis=1).max())
        C = max(C, num / denom)
    return C


def localization_check(A, Q, tol=1e-8):
    """Spectral norm of A deflated by Q: ``||(I - QQ^T) A (I - QQ^T)||_2``.

    Compare against ``|lam_1| eps + |lam_{r+1}|`` to certify that Q is the
    leading invariant subspace of the residual-perturbed operator.
    """
    Q = matcore.check_orthonormal(Q)
    n = Q.shape[0]

    def deflated(x):
        y = x - Q @ (Q.T @ x)
        y = A.matvec(y) if hasattr(A, "matvec") else A @ y
        return y - Q @ (Q.T @ y)

    return matcore.power_spectral_norm(deflated, deflated, n, tol, 100 * n)
