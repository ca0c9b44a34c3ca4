"""End-to-end pipelines: eigenvector centrality, CPQR spectral clustering,
and sweep-cut bipartitioning, each driven by the iteration engine with a
selectable stopping rule."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from spectralstop import matcore, netgraph, subspace


@dataclass
class Ranking:
    order: np.ndarray       # nodes, descending score (index tie-break)
    scores: np.ndarray      # per-node scores
    truncation: int         # size of the "top" set for comparisons

    @property
    def top(self):
        return self.order[: self.truncation]


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    k: int


class ShiftedAdjacency:
    """Adjacency plus identity; used when the raw spectrum may be bipartite."""

    def __init__(self, adj):
        self.adj = adj
        self.shape = adj.shape

    def matvec(self, x):
        return self.adj.matvec(x) + x

    def matmat(self, X):
        return self.adj.matmat(X) + X


def is_bipartite_connected(g):
    """(connected, bipartite) via the double-cover component count.

    The double cover of a connected graph has one component iff the graph
    is non-bipartite.
    """
    import scipy.sparse as sp
    import scipy.sparse.csgraph as csgraph

    u, v = g.edges[:, 0], g.edges[:, 1]
    rows = np.concatenate([u, v + g.n, v, u + g.n])
    cols = np.concatenate([v + g.n, u, u + g.n, v])
    cover = sp.csr_matrix((np.ones(len(rows)), (rows, cols)),
                          shape=(2 * g.n, 2 * g.n))
    ncomp_cover = csgraph.connected_components(cover, directed=False)[0]
    adj = g.adjacency().to_scipy()
    ncomp = csgraph.connected_components(adj, directed=False)[0]
    connected = ncomp == 1
    bipartite = connected and ncomp_cover == 2
    return connected, bipartite


def rank_by_scores(scores, truncation=None):
    scores = np.asarray(scores, dtype=np.float64)
    n = len(scores)
    order = np.lexsort((np.arange(n), -scores))
    if truncation is None:
        truncation = int(np.floor(np.sqrt(n)))
    return Ranking(order=order, scores=scores, truncation=truncation)


def eigenvector_centrality(g, config, seed=0):
    """Centrality scores from the leading adjacency eigenvector.

    Runs the iteration on the raw adjacency (shifted by +I for bipartite
    graphs, whose extreme eigenvalues tie in magnitude) and returns the
    sign-fixed ranking together with the run result.
    """
    connected, bipartite = is_bipartite_connected(g)
    if not connected:
        raise ValueError("graph is disconnected; extract the largest "
                         "connected component first")
    op = g.adjacency()
    if bipartite:
        op = ShiftedAdjacency(op)
    result = subspace.run(op, config, seed=seed)
    v = subspace.sign_fix(result.state.Q[:, 0])
    return rank_by_scores(v), result


def _count_inversions(seq):
    """Merge-sort inversion count; O(n log n)."""
    seq = list(seq)
    total = 0
    width = 1
    n = len(seq)
    buf = [0] * n
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if seq[i] <= seq[j]:
                    buf[k] = seq[i]
                    i += 1
                else:
                    buf[k] = seq[j]
                    total += mid - i
                    j += 1
                k += 1
            buf[k:hi] = seq[i:mid] if i < mid else seq[j:hi]
            seq[lo:hi] = buf[lo:hi]
        width *= 2
    return total


def kendall_tau_dist(rank_a, rank_b):
    """Normalized Kendall distance ``(1 - tau) / 2`` between two total orders.

    Equals the fraction of discordant pairs; 0 for identical rankings, 1 for
    fully reversed ones.
    """
    a = np.asarray(rank_a.order if isinstance(rank_a, Ranking) else rank_a)
    b = np.asarray(rank_b.order if isinstance(rank_b, Ranking) else rank_b)
    if len(a) != len(b) or not np.array_equal(np.sort(a), np.sort(b)):
        raise ValueError("rankings must cover the same node universe")
    n = len(a)
    if n < 2:
        return 0.0
    pos_b = np.empty(b.max() + 1, dtype=np.int64)
    pos_b[b] = np.arange(n)
    inversions = _count_inversions(pos_b[a].tolist())
    return inversions / (n * (n - 1) / 2)


def truncated_kendall_dist(rank_a, rank_b):
    """Kendall distance between the top sets of two rankings.

    Both rankings are restricted to the union of the two top sets; a node
    absent from one ranking's top set is placed below all of that ranking's
    top nodes, ordered by its full ranking.
    """
    union = set(rank_a.top.tolist()) | set(rank_b.top.tolist())

    def restricted(r):
        top = [v for v in r.top.tolist() if v in union]
        top_set = set(top)
        below = [v for v in r.order.tolist()
                 if v in union and v not in top_set]
        return np.array(top + below, dtype=np.int64)

    return kendall_tau_dist(restricted(rank_a), restricted(rank_b))


def cpqr_cluster(Vk, k=None):
    """Deterministic cluster assignment from the eigenvector block.

    Column-pivoted QR of ``Vk.T`` selects k representative nodes; the polar
    factor of that k x k block rotates the embedding so each row acts as a
    cluster indicator.  Argmax ties go to the smallest cluster index.
    """
    Vk = matcore.check_orthonormal(Vk)
    r = Vk.shape[1]
    k = r if k is None else k
    _, R, piv = scipy.linalg.qr(Vk.T, pivoting=True, mode="economic")
    if np.abs(np.diag(R)).min() < 1e-12 * np.abs(R).max():
        raise ValueError("degenerate embedding: rank-deficient pivot block")
    pivot_block = Vk.T[:, piv[:k]]
    U_s, _, W_s = matcore.small_svd(pivot_block)
    U = U_s @ W_s.T
    labels = np.argmax(np.abs(U @ Vk.T), axis=0)
    return ClusterAssignment(labels=labels.astype(np.int64), k=k)


def spectral_clustering_pipeline(g, r, rho=None, epsilon=1e-2,
                                 mode="two_inf", p=3, seed=0,
                                 max_iters=5000):
    """Cluster via the regularized normalized adjacency and CPQR assignment.

    ``rho`` defaults to the rounded average degree.  Returns the assignment,
    its normalized-cut value, and the run result.
    """
    if rho is None:
        rho = default_rho(g)
    op = netgraph.RegularizedOperator(g, rho=rho, shift="plus_identity")
    config = subspace.StoppingConfig(epsilon=epsilon, r=r, p=p, mode=mode,
                                     max_iters=max_iters)
    result = subspace.run(op, config, seed=seed)
    Vk = result.state.Q[:, :r]
    assignment = cpqr_cluster(Vk, r)
    return assignment, netgraph.ncut(g, assignment.labels), result


def default_rho(g):
    """Regularization constant near the average degree."""
    return float(round(2 * g.m / g.n))


def fiedler_vector(g, epsilon, mode="two_inf", p=3, seed=0, max_iters=5000):
    """Second eigenvector of the normalized adjacency via deflated iteration.

    The closed-form top eigenvector (degree square roots) is projected out
    of the +I-shifted operator every application.
    """
    op = netgraph.RegularizedOperator(g, rho=0.0, shift="plus_identity")
    deflated = netgraph.DeflatedOperator(op, op.perron_vector())
    config = subspace.StoppingConfig(epsilon=epsilon, r=1, p=p, mode=mode,
                                     max_iters=max_iters)
    result = subspace.run(deflated, config, seed=seed)
    return subspace.sign_fix(result.state.Q[:, 0]), result


def bipartition_experiment(g, epsilon, mode="two_inf", p=3, seed=0,
                           max_iters=5000):
    """Sweep-cut profile from the approximate Fiedler vector."""
    v, result = fiedler_vector(g, epsilon, mode=mode, p=p, seed=seed,
                               max_iters=max_iters)
    profile = netgraph.sweep_cut(g, v)
    return profile, result
