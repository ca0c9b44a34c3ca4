"""Shared test helpers: random orthonormal blocks, small graphs, oracles."""

import numpy as np
import pytest

from spectralstop import matcore, netgraph


def rng_for(seed):
    return np.random.Generator(np.random.Philox(seed))


def random_orthonormal(n, r, seed=0):
    rng = rng_for(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    return Q


def random_symmetric(n, seed=0):
    rng = rng_for(seed)
    G = rng.standard_normal((n, n))
    return 0.5 * (G + G.T)


def random_spd(n, seed=0):
    rng = rng_for(seed)
    G = rng.standard_normal((n, n))
    return G @ G.T + 0.1 * np.eye(n)


def graph_from_edges(edges, n=None):
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if n is None:
        n = int(edges.max()) + 1
    return netgraph.GraphData(n, edges)


def path_graph(n):
    return graph_from_edges([(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return graph_from_edges([(i, (i + 1) % n) for i in range(n)])


def complete_graph(n):
    return graph_from_edges([(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves):
    return graph_from_edges([(0, i) for i in range(1, leaves + 1)])


def two_cliques(k, bridge=True):
    """Two K_k cliques, optionally joined by a single edge 0 -- k."""
    edges = [(i, j) for i in range(k) for j in range(i + 1, k)]
    edges += [(k + i, k + j) for i in range(k) for j in range(i + 1, k)]
    if bridge:
        edges.append((0, k))
    return graph_from_edges(edges, n=2 * k)


def barbell_graph(k=5):
    return two_cliques(k, bridge=True)


def random_connected_graph(n, p, seed=0):
    """Erdos-Renyi conditioned on connectivity (resample until connected)."""
    rng = rng_for(seed)
    for _ in range(200):
        mask = rng.random((n, n)) < p
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if mask[i, j]]
        # ensure no isolated vertices by linking a spanning path candidate
        if not edges:
            continue
        g = graph_from_edges(edges, n=n)
        if _is_connected(g):
            return g
    # fall back: add a spanning path
    edges += [(i, i + 1) for i in range(n - 1)]
    return graph_from_edges(sorted(set(map(tuple, edges))), n=n)


def _is_connected(g):
    adj = [[] for _ in range(g.n)]
    for u, v in g.edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == g.n


def dense_normalized_adjacency(g, rho=0.0, shift=False):
    A = g.adjacency().to_dense()
    if rho > 0:
        A = A + rho / g.n
    d = np.asarray(g.degrees, dtype=np.float64) + rho
    Dinv = 1.0 / np.sqrt(d)
    M = Dinv[:, None] * A * Dinv[None, :]
    if shift:
        M = M + np.eye(g.n)
    return M


def exact_fiedler(g):
    """Second eigenvector of the dense normalized adjacency."""
    M = dense_normalized_adjacency(g)
    w, U = np.linalg.eigh(M)
    return U[:, -2]


def brute_conductance(g, S):
    """Edge-by-edge conductance with the min-volume denominator."""
    S = set(int(v) for v in S)
    cut = sum(1 for u, v in g.edges if (u in S) != (v in S))
    vol = sum(int(g.degrees[v]) for v in S)
    denom = min(vol, g.volume() - vol)
    if denom == 0:
        return 1.0 if cut else 0.0
    return cut / denom


@pytest.fixture
def tmp_edge_file(tmp_path):
    def write(lines, name="graph.txt"):
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n")
        return path

    return write
