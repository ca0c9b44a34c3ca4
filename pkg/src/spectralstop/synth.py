"""Synthetic test matrices with a planted leading subspace and geometric spectrum.

The generator plants a Haar-distributed leading eigenblock V, assigns
eigenvalues ``rho^(i-1)``, and completes the basis from a random subset of
identity columns orthogonalized against V.  Instances are deterministic in
(spec, seed): the RNG is Philox (counter-based, reproducible across
platforms).
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from spectralstop import matcore

DENSE_N_CAP = 8000


@dataclass(frozen=True)
class SyntheticSpec:
    n: int
    r: int
    rho: float
    seed: int = 0
    tail_style: str = "identity_residual"  # or "full_haar"

    def __post_init__(self):
        if not (0.0 < self.rho < 1.0):
            raise ValueError("rho must lie in (0, 1)")
        if not (1 <= self.r < self.n):
            raise ValueError("need 1 <= r < n")
        if self.tail_style not in ("identity_residual", "full_haar"):
            raise ValueError(f"unknown tail_style {self.tail_style!r}")
        if self.n > DENSE_N_CAP:
            raise ValueError(f"dense assembly capped at n = {DENSE_N_CAP}")


@dataclass
class SyntheticInstance:
    spec: SyntheticSpec
    A: np.ndarray          # dense symmetric n x n
    V: np.ndarray          # planted leading eigenvectors, n x r
    eigenvalues: np.ndarray  # full spectrum, descending
    basis: np.ndarray | None = None  # full eigenvector matrix [V | V_perp]

    @property
    def n(self):
        return self.spec.n

    @property
    def r(self):
        return self.spec.r

    def operator(self):
        return DenseSymOperator(self.A)


class DenseSymOperator:
    """Dense symmetric matrix behind the sparse-operator interface."""

    def __init__(self, A):
        self.A = np.asarray(A, dtype=np.float64)
        self.shape = self.A.shape

    def matvec(self, x):
        return self.A @ x

    def matmat(self, X):
        return self.A @ X


def haar_orthogonal(n, k, seed=0):
    """Haar-distributed orthonormal n x k block.

    QR of a standard Gaussian matrix with the R-diagonal sign correction
    ``Q <- Q * sign(diag(R))``.
    """
    if k > n:
        raise ValueError("need k <= n")
    rng = seed if isinstance(seed, np.random.Generator) else \
        np.random.Generator(np.random.Philox(seed))
    G = rng.standard_normal((n, k))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def _identity_residual_tail(V, rng, retries=10):
    """Orthonormal complement seeded from random identity columns.

    Two-pass block orthogonalization against V, then QR among the residuals.
    """
    n, r = V.shape
    for _ in range(retries):
        cols = rng.permutation(n)[: n - r]
        B = np.zeros((n, n - r))
        B[cols, np.arange(n - r)] = 1.0
        B -= V @ (V.T @ B)
        B -= V @ (V.T @ B)
        try:
            Q, _ = matcore.thin_qr(B)
        except matcore.RankDeficiencyError:
            continue
        return Q
    raise RuntimeError("could not orthogonalize identity columns against V")


def make_instance(spec, keep_basis=True):
    """Assemble a dense instance with planted eigenstructure.

    A sampled Haar block plays the role of r random columns of a Haar n x n
    matrix (the marginal distributions coincide).
    """
    ss = np.random.SeedSequence(spec.seed)
    rng_v, rng_tail = (np.random.Generator(np.random.Philox(s))
                       for s in ss.spawn(2))
    n, r = spec.n, spec.r
    lam = spec.rho ** np.arange(n)
    if spec.tail_style == "full_haar":
        W = haar_orthogonal(n, n, seed=rng_v)
        V, V_perp = W[:, :r], W[:, r:]
    else:
        V = haar_orthogonal(n, r, seed=rng_v)
        V_perp = _identity_residual_tail(V, rng_tail)
    A = (V * lam[:r]) @ V.T + (V_perp * lam[r:]) @ V_perp.T
    A = 0.5 * (A + A.T)
    basis = np.hstack([V, V_perp]) if keep_basis else None
    return SyntheticInstance(spec=spec, A=A, V=V, eigenvalues=lam, basis=basis)


def save_instance(inst, path):
    """Cache an instance as a JSON header plus little-endian f64 blocks.

    Blocks are stored column-major, in the order listed in the header.
    """
    path = Path(path)
    bin_path = path.with_suffix(".bin")
    blocks = [("A", inst.A), ("V", inst.V),
              ("eigenvalues", inst.eigenvalues.reshape(-1, 1))]
    if inst.basis is not None:
        blocks.append(("basis", inst.basis))
    header = {
        "format": "spectralstop-synth-v1",
        "dtype": "<f8",
        "order": "F",
        "spec": {"n": inst.spec.n, "r": inst.spec.r, "rho": inst.spec.rho,
                 "seed": inst.spec.seed, "tail_style": inst.spec.tail_style},
        "blocks": [{"name": name, "shape": list(arr.shape)}
                   for name, arr in blocks],
    }
    with open(bin_path, "wb") as fh:
        for _, arr in blocks:
            fh.write(np.asfortranarray(arr, dtype="<f8").tobytes(order="F"))
    path.write_text(json.dumps(header))


def load_instance(path):
    path = Path(path)
    header = json.loads(path.read_text())
    if header.get("format") != "spectralstop-synth-v1":
        raise ValueError("unrecognized instance file")
    raw = path.with_suffix(".bin").read_bytes()
    offset = 0
    arrays = {}
    for blk in header["blocks"]:
        shape = tuple(blk["shape"])
        count = int(np.prod(shape))
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        arrays[blk["name"]] = arr.reshape(shape, order="F").astype(np.float64)
        offset += count * 8
    spec = SyntheticSpec(**header["spec"])
    return SyntheticInstance(spec=spec, A=arrays["A"], V=arrays["V"],
                             eigenvalues=arrays["eigenvalues"].ravel(),
                             basis=arrays.get("basis"))
