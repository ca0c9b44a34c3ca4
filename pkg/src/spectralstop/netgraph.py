"""Graph ingestion and the graph-side spectral machinery.

Covers edge-list loading, largest-component extraction, the (regularized)
normalized adjacency operator, conductance in both denominator conventions,
normalized cut, and sweep-cut profiles.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph

from spectralstop.matcore import SparseSymMatrix


class EdgeListParseError(ValueError):
    def __init__(self, path, lineno, line):
        super().__init__(f"{path}:{lineno}: malformed edge line {line!r}")
        self.lineno = lineno


class GraphData:
    """Undirected simple graph: deduplicated edges, no self-loops.

    ``node_labels[i]`` is the original ID of compacted node i.
    """

    def __init__(self, n, edges, node_labels=None, dropped_self_loops=0):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.n = int(n)
        self.edges = edges
        self.m = len(edges)
        self.node_labels = (np.arange(n, dtype=np.int64)
                            if node_labels is None
                            else np.asarray(node_labels, dtype=np.int64))
        self.dropped_self_loops = dropped_self_loops
        self.degrees = (np.bincount(edges[:, 0], minlength=n)
                        + np.bincount(edges[:, 1], minlength=n))
        self._adj = None

    def adjacency(self):
        """0/1 adjacency as a SparseSymMatrix (cached)."""
        if self._adj is None:
            self._adj = SparseSymMatrix.from_edges(self.n, self.edges)
        return self._adj

    def volume(self):
        return 2 * self.m


def _dedupe(pairs):
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    self_loops = int((pairs[:, 0] == pairs[:, 1]).sum())
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    edges = np.unique(np.column_stack([lo, hi]), axis=0)
    return edges, self_loops


def load_edge_list(path):
    """Read a whitespace-separated integer pair per line; '#' lines ignored.

    Node IDs are compacted to 0..n-1 with the original IDs kept as labels;
    duplicate edges and self-loops are dropped.
    """
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) != 2:
                raise EdgeListParseError(path, lineno, stripped)
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise EdgeListParseError(path, lineno, stripped) from None
    if not pairs:
        raise ValueError(f"{path}: empty graph")
    edges, self_loops = _dedupe(pairs)
    labels = np.unique(edges)
    remap = {int(v): i for i, v in enumerate(labels)}
    compact = np.array([[remap[int(u)], remap[int(v)]] for u, v in edges],
                       dtype=np.int64)
    return GraphData(len(labels), compact, node_labels=labels,
                     dropped_self_loops=self_loops)


def largest_connected_component(g):
    """Induced subgraph on the largest component.

    Ties between equally sized components go to the one containing the
    smallest original node ID.
    """
    adj = sp.csr_matrix(
        (np.ones(2 * g.m), (np.concatenate([g.edges[:, 0], g.edges[:, 1]]),
                            np.concatenate([g.edges[:, 1], g.edges[:, 0]]))),
        shape=(g.n, g.n))
    ncomp, labels = csgraph.connected_components(adj, directed=False)
    if ncomp == 1:
        return g
    sizes = np.bincount(labels, minlength=ncomp)
    best = sizes.max()
    # smallest node index among tied components wins; nodes are sorted by label
    candidates = np.flatnonzero(sizes == best)
    first_node = np.array([np.flatnonzero(labels == c)[0] for c in candidates])
    keep = candidates[np.argmin(g.node_labels[first_node])]
    nodes = np.flatnonzero(labels == keep)
    remap = -np.ones(g.n, dtype=np.int64)
    remap[nodes] = np.arange(len(nodes))
    mask = np.isin(g.edges[:, 0], nodes) & np.isin(g.edges[:, 1], nodes)
    sub_edges = remap[g.edges[mask]]
    return GraphData(len(nodes), sub_edges, node_labels=g.node_labels[nodes],
                     dropped_self_loops=g.dropped_self_loops)


class RegularizedOperator:
    """Regularized, degree-normalized adjacency with an optional +I shift.

    Applies ``D_rho^{-1/2} (A + (rho/n) 11^T) D_rho^{-1/2} (+ I)`` through a
    sparse matvec plus a rank-one correction; the dense rank-one term is
    never materialized.
    """

    def __init__(self, g, rho=0.0, shift="none"):
        if rho < 0:
            raise ValueError("rho must be nonnegative")
        if shift not in ("none", "plus_identity"):
            raise ValueError(f"unknown shift {shift!r}")
        if rho == 0.0 and np.any(g.degrees == 0):
            raise ZeroDivisionError("zero-degree node with rho = 0")
        self.graph = g
        self.rho = float(rho)
        self.shift = shift
        self.n = g.n
        self.shape = (g.n, g.n)
        self._adj = g.adjacency()
        self._dinv_sqrt = 1.0 / np.sqrt(g.degrees + rho)

    def matvec(self, x):
        x = np.asarray(x, dtype=np.float64)
        xs = self._dinv_sqrt * x
        y = self._adj.matvec(xs)
        if self.rho > 0:
            y = y + (self.rho / self.n) * xs.sum()
        y = self._dinv_sqrt * y
        if self.shift == "plus_identity":
            y = y + x
        return y

    def matmat(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            return self.matvec(X)
        Xs = self._dinv_sqrt[:, None] * X
        Y = self._adj.matmat(Xs)
        if self.rho > 0:
            Y = Y + (self.rho / self.n) * Xs.sum(axis=0)
        Y = self._dinv_sqrt[:, None] * Y
        if self.shift == "plus_identity":
            Y = Y + X
        return Y

    def perron_vector(self):
        """Closed-form top eigenvector for rho = 0: normalized D^{1/2} 1."""
        v = np.sqrt(self.graph.degrees.astype(np.float64))
        return v / np.linalg.norm(v)


class DeflatedOperator:
    """Operator with a known eigenvector projected out of both sides."""

    def __init__(self, op, vec):
        self.op = op
        self.vec = np.asarray(vec, dtype=np.float64)
        self.shape = op.shape

    def _project(self, X):
        if X.ndim == 1:
            return X - self.vec * (self.vec @ X)
        return X - np.outer(self.vec, self.vec @ X)

    def matvec(self, x):
        return self._project(self.op.matvec(self._project(np.asarray(x, float))))

    def matmat(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            return self.matvec(X)
        return self._project(self.op.matmat(self._project(X)))


def _cut_and_volume(g, mask):
    in_s = mask[g.edges[:, 0]].astype(np.int64) + mask[g.edges[:, 1]]
    cut = int((in_s == 1).sum())
    vol = int(g.degrees[mask].sum())
    return cut, vol


def _membership_mask(g, S):
    mask = np.zeros(g.n, dtype=bool)
    mask[np.asarray(list(S), dtype=np.int64)] = True
    return mask


def conductance(g, S):
    """``cut(S) / min(vol(S), vol(S^c))`` with integer edge counting."""
    mask = _membership_mask(g, S)
    k = int(mask.sum())
    if k == 0 or k == g.n:
        raise ValueError("conductance undefined for empty set or full vertex set")
    cut, vol = _cut_and_volume(g, mask)
    denom = min(vol, g.volume() - vol)
    if denom == 0:
        return 1.0 if cut else 0.0
    return cut / denom


def conductance_onesided(g, S):
    """``cut(S) / vol(S)``: the denominator convention used inside ncut."""
    mask = _membership_mask(g, S)
    k = int(mask.sum())
    if k == 0 or k == g.n:
        raise ValueError("conductance undefined for empty set or full vertex set")
    cut, vol = _cut_and_volume(g, mask)
    if vol == 0:
        return 1.0 if cut else 0.0
    return cut / vol


def ncut(g, assignment):
    """Half the sum of one-sided conductances over the clusters."""
    assignment = np.asarray(assignment, dtype=np.int64)
    if len(assignment) != g.n:
        raise ValueError("every node needs a cluster")
    clusters = np.unique(assignment)
    if len(clusters) < 2:
        raise ValueError("need at least two nonempty clusters")
    total = 0.0
    for c in clusters:
        total += conductance_onesided(g, np.flatnonzero(assignment == c))
    return 0.5 * total


@dataclass
class SweepProfile:
    order: np.ndarray          # nodes sorted by scaled eigenvector value
    conductance: np.ndarray    # prefix conductances, length n - 1
    argmin: int                # index into `conductance`

    @property
    def best_prefix(self):
        return self.order[: self.argmin + 1]

    @property
    def min_conductance(self):
        return float(self.conductance[self.argmin])

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("prefix_size,conductance\n")
            for k, phi in enumerate(self.conductance, start=1):
                fh.write(f"{k},{phi:.17g}\n")


def sweep_cut(g, fiedler):
    """Conductance of every prefix of the degree-scaled eigenvector order.

    Nodes are sorted by ``fiedler / sqrt(degree)`` descending (index
    tie-break); prefix cut sizes come from one vectorized pass over edges.
    """
    fiedler = np.asarray(fiedler, dtype=np.float64)
    if len(fiedler) != g.n:
        raise ValueError("eigenvector length must equal node count")
    scaled = fiedler / np.sqrt(np.maximum(g.degrees, 1))
    order = np.lexsort((np.arange(g.n), -scaled))
    rank = np.empty(g.n, dtype=np.int64)
    rank[order] = np.arange(g.n)

    # prefix of size k contains ranks < k; an edge is internal once both
    # endpoints are in, i.e. for k > max(rank_u, rank_v)
    edge_max_rank = np.maximum(rank[g.edges[:, 0]], rank[g.edges[:, 1]])
    internal = np.cumsum(np.bincount(edge_max_rank + 1, minlength=g.n + 1))
    vol = np.cumsum(g.degrees[order])
    ks = np.arange(1, g.n)
    cut = vol[ks - 1] - 2 * internal[ks]
    denom = np.minimum(vol[ks - 1], g.volume() - vol[ks - 1])
    phi = np.where(denom > 0, cut / np.maximum(denom, 1), (cut > 0) * 1.0)
    return SweepProfile(order=order, conductance=phi, argmin=int(np.argmin(phi)))
