"""Subspace iteration with Rayleigh-Ritz extraction and two stopping rules.

The engine repeats multiply-then-orthonormalize against any operator that
exposes ``shape`` and ``matmat``; after each step the iterate is rotated to
Ritz vectors so that the residual ``A Q - Q S`` has a diagonal S.  Both the
row-wise residual criterion and the classical per-column criterion are
evaluated every iteration, so a single run yields both stopping times.
"""

from dataclasses import dataclass, field

import numpy as np

from spectralstop import matcore


class GapError(ValueError):
    """Nonpositive gap estimate; widen the augmentation or abort."""


@dataclass(frozen=True)
class StoppingConfig:
    epsilon: float
    r: int
    p: int = 3
    mode: str = "two_inf"  # "two_inf" | "naive_l2"
    max_iters: int = 5000
    gap_floor: float = 1e-14
    sep_fraction: float = 1.0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.r < 1:
            raise ValueError("r must be at least 1")
        if self.p < 0:
            raise ValueError("p must be nonnegative")
        if self.mode not in ("two_inf", "naive_l2", "both"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode in ("two_inf", "both") and self.p < 1:
            raise ValueError("two_inf mode needs p >= 1 for the gap estimate")


@dataclass
class IterationState:
    t: int
    Q: np.ndarray
    ritz_values: np.ndarray | None = None
    R: np.ndarray | None = None


@dataclass
class ResidualReport:
    t: int
    res2_per_column: np.ndarray
    res2inf: float | None
    E_norm2: float
    E_norm2inf: float
    gap_est: float | None
    lambda_gap_est: float | None
    ritz_values: np.ndarray
    nonpositive_ritz: bool = False


@dataclass
class RunResult:
    state: IterationState
    trace: list[ResidualReport] = field(default_factory=list)
    t_stop: int | None = None
    t_comp: int | None = None
    t_naive: int | None = None
    exhausted: bool = False


def iterate_step(A, state):
    """One multiply + QR step; returns a new state with t incremented."""
    Y = A.matmat(state.Q)
    Q, R = matcore.thin_qr(Y)
    return IterationState(t=state.t + 1, Q=Q, R=R)


def rayleigh_ritz(A, Q):
    """Ritz values (descending) and the iterate rotated to Ritz vectors."""
    B = A.matmat(Q)
    H = Q.T @ B
    H = 0.5 * (H + H.T)
    w, Z = np.linalg.eigh(H)
    order = np.argsort(w)[::-1]
    return w[order], Q @ Z[:, order], B @ Z[:, order]


def residual_block(A, Q, ritz_values):
    """Residual ``E = A Q - Q diag(ritz_values)``."""
    return A.matmat(Q) - Q * np.asarray(ritz_values)


def res_two_inf(Q, E, gap_est, lambda_gap_est, E_norm2=None):
    """Row-wise residual combining the quadratic and deflated linear terms.

    ``8 ||Q||_{2->inf} (||E||_2 / lambda_gap)^2
    + (2 ||(I - QQ^T) E||_{2->inf} / gap) (1 + 2 ||E||_2 / lambda_gap)``
    """
    if gap_est is None or gap_est <= 0 or lambda_gap_est is None or lambda_gap_est <= 0:
        raise GapError("residual evaluation requires positive gap estimates")
    if E_norm2 is None:
        E_norm2 = gram_spectral_norm(E)
    E_defl = E - Q @ (Q.T @ E)
    term1 = 8.0 * matcore.two_to_inf_norm(Q) * (E_norm2 / lambda_gap_est) ** 2
    term2 = (2.0 * matcore.two_to_inf_norm(E_defl) / gap_est) * (
        1.0 + 2.0 * E_norm2 / lambda_gap_est)
    return term1 + term2


def gram_spectral_norm(E):
    """``||E||_2`` through the r x r Gram matrix: exact small eigenproblem."""
    w = np.linalg.eigvalsh(E.T @ E)
    return float(np.sqrt(max(0.0, w[-1])))


def gap_estimate(ritz_values, r, sep_fraction=1.0):
    """(gap_est, lambda_gap_est) from the Ritz values.

    ``lambda_gap_est`` is the Ritz eigengap at position r; ``gap_est`` scales
    it by the configured separation fraction.
    """
    ritz_values = np.asarray(ritz_values)
    if len(ritz_values) < r + 1:
        raise ValueError("need at least r + 1 Ritz values for the gap estimate")
    lambda_gap = float(ritz_values[r - 1] - ritz_values[r])
    return sep_fraction * lambda_gap, lambda_gap


def sign_fix(v):
    """Flip ``v`` so its largest-magnitude entry is positive.

    Robust stand-in for requiring all entries positive: a numerically
    converged Perron vector may carry tiny negative round-off entries.
    """
    v = np.asarray(v, dtype=np.float64)
    if not np.any(v):
        raise ValueError("cannot sign-fix the zero vector")
    k = np.argmax(np.abs(v))
    return -v if v[k] < 0 else v.copy()


def default_start(n, width, seed=0):
    """Normalized all-ones first column, Haar-random remainder, orthonormalized."""
    rng = np.random.Generator(np.random.Philox(seed))
    M = np.empty((n, width))
    M[:, 0] = 1.0 / np.sqrt(n)
    if width > 1:
        M[:, 1:] = rng.standard_normal((n, width - 1))
    Q, _ = matcore.thin_qr(M)
    # thin_qr sign-normalizes, so column 0 stays the positive all-ones direction
    return Q


def run(A, config, Q0=None, seed=0, callback=None):
    """Iterate until the configured stopping rule fires or max_iters runs out.

    Both criteria are checked every iteration; the result carries the first
    iteration at which each fired (t_comp for the row-wise rule, t_naive for
    the per-column rule) alongside the full trace.  ``callback(t, Q, report)``
    runs after each iteration, with Q rotated to Ritz vectors.
    """
    width = config.r + config.p
    if Q0 is None:
        Q0 = default_start(A.shape[0], width, seed=seed)
    Q0 = matcore.check_orthonormal(Q0)
    if Q0.shape[1] != width:
        raise ValueError("Q0 width must equal r + p")

    r = config.r
    state = IterationState(t=0, Q=Q0)
    result = RunResult(state=state)
    Y = None  # A @ state.Q, reused across iterations

    for _ in range(config.max_iters):
        if Y is None:
            Y = A.matmat(state.Q)
        Q, R = matcore.thin_qr(Y)
        B = A.matmat(Q)
        H = 0.5 * ((G := Q.T @ B) + G.T)
        w, Z = np.linalg.eigh(H)
        order = np.argsort(w)[::-1]
        ritz = w[order]
        Q = Q @ Z[:, order]
        B = B @ Z[:, order]
        t = state.t + 1
        state = IterationState(t=t, Q=Q, ritz_values=ritz, R=R)

        E_full = B - Q * ritz
        Er = E_full[:, :r]
        Qr = Q[:, :r]
        res2_cols = np.linalg.norm(Er, axis=0)
        E2 = gram_spectral_norm(Er)
        E2inf = matcore.two_to_inf_norm(Er)

        gap_est = lambda_gap = None
        res2inf = None
        if config.p >= 1:
            gap_est, lambda_gap = gap_estimate(ritz, r, config.sep_fraction)
            if gap_est > config.gap_floor:
                res2inf = res_two_inf(Qr, Er, gap_est, lambda_gap, E_norm2=E2)

        nonpos = bool(np.any(ritz[:r] <= 0))
        report = ResidualReport(
            t=t, res2_per_column=res2_cols, res2inf=res2inf,
            E_norm2=E2, E_norm2inf=E2inf, gap_est=gap_est,
            lambda_gap_est=lambda_gap, ritz_values=ritz.copy(),
            nonpositive_ritz=nonpos)
        result.trace.append(report)
        if callback is not None:
            callback(t, Q, report)

        if result.t_comp is None and res2inf is not None and res2inf <= config.epsilon:
            result.t_comp = t
        # per-column relative rule; |ritz| guards near-zero or negative values
        naive_ok = np.all(res2_cols <= config.epsilon * np.abs(ritz[:r]))
        if result.t_naive is None and naive_ok:
            result.t_naive = t

        if config.mode == "two_inf":
            fired = result.t_comp
        elif config.mode == "naive_l2":
            fired = result.t_naive
        else:  # "both": keep going until each rule has fired once
            fired = t if (result.t_comp is not None
                          and result.t_naive is not None) else None
        if fired is not None:
            result.t_stop = fired
            break
        Y = B  # A @ Q for the next iteration
    else:
        result.exhausted = True

    result.state = state
    return result
