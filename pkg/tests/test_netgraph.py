"""Graph ingestion, normalized-adjacency operators, conductance, sweep cuts."""

import itertools

import numpy as np
import pytest

from spectralstop import netgraph
from tests.conftest import (barbell_graph, brute_conductance, complete_graph,
                            cycle_graph, dense_normalized_adjacency,
                            exact_fiedler, graph_from_edges, path_graph,
                            random_connected_graph, rng_for, two_cliques)


# ---------------------------------------------------------------- loading


def test_load_path_graph(tmp_edge_file):
    g = netgraph.load_edge_list(tmp_edge_file(["0 1", "1 2"]))
    assert g.n == 3 and g.m == 2
    np.testing.assert_array_equal(g.degrees, [1, 2, 1])


def test_load_ignores_comments_and_blank_lines(tmp_edge_file):
    g = netgraph.load_edge_list(tmp_edge_file(["# header", "", "0 1", "1 2"]))
    assert g.n == 3 and g.m == 2


def test_load_drops_self_loops_and_duplicates(tmp_edge_file):
    g = netgraph.load_edge_list(
        tmp_edge_file(["1 1", "0 1", "1 0", "0 1", "1 2"]))
    assert g.m == 2
    assert g.dropped_self_loops == 1


def test_load_compacts_node_ids(tmp_edge_file):
    g = netgraph.load_edge_list(tmp_edge_file(["10 30", "30 77"]))
    assert g.n == 3
    np.testing.assert_array_equal(g.node_labels, [10, 30, 77])


def test_load_rejects_malformed_line(tmp_edge_file):
    with pytest.raises(netgraph.EdgeListParseError) as exc:
        netgraph.load_edge_list(tmp_edge_file(["0 1", "not numbers"]))
    assert exc.value.lineno == 2
    with pytest.raises(netgraph.EdgeListParseError):
        netgraph.load_edge_list(tmp_edge_file(["0 1 2"]))


def test_load_rejects_empty_graph(tmp_edge_file):
    with pytest.raises(ValueError):
        netgraph.load_edge_list(tmp_edge_file(["# only a comment"]))


# ---------------------------------------------------------------- LCC


def test_lcc_connected_graph_unchanged():
    g = path_graph(5)
    assert netgraph.largest_connected_component(g) is g


def test_lcc_tie_break_smallest_label():
    # two disjoint triangles; the one with node 0 wins the tie
    g = graph_from_edges([(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    lcc = netgraph.largest_connected_component(g)
    assert lcc.n == 3
    np.testing.assert_array_equal(lcc.node_labels, [0, 1, 2])


def test_lcc_sizes_match_bfs_oracle():
    rng = rng_for(0)
    for trial in range(20):
        n = 30
        edges = set()
        for _ in range(25):
            u, v = rng.integers(0, n, 2)
            if u != v:
                edges.add((min(u, v), max(u, v)))
        edges = sorted(edges)
        if not edges:
            continue
        g = graph_from_edges(edges, n=n)
        lcc = netgraph.largest_connected_component(g)
        # BFS oracle over the original graph
        adj = [[] for _ in range(n)]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        best = 0
        seen_all = set()
        for s in range(n):
            if s in seen_all:
                continue
            comp = {s}
            stack = [s]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y not in comp:
                        comp.add(y)
                        stack.append(y)
            seen_all |= comp
            best = max(best, len(comp))
        assert lcc.n == best


# ---------------------------------------------------------------- operator


def test_perron_vector_is_stationary():
    g = random_connected_graph(20, 0.3, seed=1)
    op = netgraph.RegularizedOperator(g, rho=0.0)
    v = op.perron_vector()
    np.testing.assert_allclose(op.matvec(v), v, atol=1e-12)


def test_shifted_spectrum_in_zero_two():
    g = random_connected_graph(15, 0.3, seed=2)
    M = dense_normalized_adjacency(g, shift=True)
    w = np.linalg.eigvalsh(M)
    assert w.min() >= -1e-12 and w.max() <= 2 + 1e-12


def test_regularized_matvec_matches_dense_assembly():
    g = random_connected_graph(12, 0.3, seed=3)
    for rho in (0.0, 2.0):
        for shift, flag in (("none", False), ("plus_identity", True)):
            op = netgraph.RegularizedOperator(g, rho=rho, shift=shift)
            M = dense_normalized_adjacency(g, rho=rho, shift=flag)
            x = rng_for(4).standard_normal(g.n)
            np.testing.assert_allclose(op.matvec(x), M @ x, atol=1e-12)
            X = rng_for(5).standard_normal((g.n, 3))
            np.testing.assert_allclose(op.matmat(X), M @ X, atol=1e-12)


def test_zero_degree_without_regularization_fails():
    g = graph_from_edges([(0, 1)], n=3)  # node 2 isolated
    with pytest.raises(ZeroDivisionError):
        netgraph.RegularizedOperator(g, rho=0.0)
    netgraph.RegularizedOperator(g, rho=1.0)  # regularized form is fine


def test_operator_validation():
    g = path_graph(3)
    with pytest.raises(ValueError):
        netgraph.RegularizedOperator(g, rho=-1.0)
    with pytest.raises(ValueError):
        netgraph.RegularizedOperator(g, shift="weird")


def test_deflated_operator_removes_direction():
    g = random_connected_graph(12, 0.4, seed=6)
    op = netgraph.RegularizedOperator(g, rho=0.0, shift="plus_identity")
    u = op.perron_vector()
    defl = netgraph.DeflatedOperator(op, u)
    x = rng_for(7).standard_normal(g.n)
    y = defl.matvec(x)
    assert abs(u @ y) <= 1e-12
    np.testing.assert_allclose(defl.matvec(u), np.zeros(g.n), atol=1e-12)


# ---------------------------------------------------------------- conductance


def test_conductance_k4_single_vertex():
    assert netgraph.conductance(complete_graph(4), [0]) == pytest.approx(1.0)


def test_conductance_two_triangles_bridge():
    g = two_cliques(3, bridge=True)
    assert netgraph.conductance(g, [0, 1, 2]) == pytest.approx(1 / 7)


def test_conductance_matches_brute_force():
    g = random_connected_graph(10, 0.4, seed=8)
    rng = rng_for(9)
    for _ in range(100):
        k = int(rng.integers(1, g.n))
        S = rng.permutation(g.n)[:k]
        assert netgraph.conductance(g, S) == \
            pytest.approx(brute_conductance(g, S), rel=1e-12)


def test_conductance_complement_symmetry():
    g = random_connected_graph(12, 0.3, seed=10)
    rng = rng_for(11)
    for _ in range(30):
        k = int(rng.integers(1, g.n))
        S = set(rng.permutation(g.n)[:k].tolist())
        Sc = set(range(g.n)) - S
        assert netgraph.conductance(g, S) == \
            pytest.approx(netgraph.conductance(g, Sc), rel=1e-12)


def test_conductance_rejects_degenerate_sets():
    g = path_graph(4)
    with pytest.raises(ValueError):
        netgraph.conductance(g, [])
    with pytest.raises(ValueError):
        netgraph.conductance(g, range(4))


def test_onesided_conductance_matches_brute_force():
    g = random_connected_graph(10, 0.4, seed=12)
    rng = rng_for(13)
    for _ in range(50):
        k = int(rng.integers(1, g.n))
        S = set(rng.permutation(g.n)[:k].tolist())
        cut = sum(1 for u, v in g.edges if (u in S) != (v in S))
        vol = sum(int(g.degrees[v]) for v in S)
        want = cut / vol if vol else float(cut > 0)
        assert netgraph.conductance_onesided(g, S) == pytest.approx(want)


# ---------------------------------------------------------------- ncut


def test_ncut_disconnected_cliques_is_zero():
    g = two_cliques(4, bridge=False)
    labels = [0] * 4 + [1] * 4
    assert netgraph.ncut(g, labels) == pytest.approx(0.0)


def test_ncut_k4_even_split():
    labels = [0, 0, 1, 1]
    assert netgraph.ncut(complete_graph(4), labels) == pytest.approx(2 / 3)


def test_ncut_matches_brute_force():
    g = random_connected_graph(9, 0.4, seed=14)
    rng = rng_for(15)
    for _ in range(30):
        labels = rng.integers(0, 3, g.n)
        if len(np.unique(labels)) < 2:
            continue
        want = 0.5 * sum(
            netgraph.conductance_onesided(g, np.flatnonzero(labels == c))
            for c in np.unique(labels))
        assert netgraph.ncut(g, labels) == pytest.approx(want, rel=1e-12)


def test_ncut_validation():
    g = path_graph(4)
    with pytest.raises(ValueError):
        netgraph.ncut(g, [0, 0, 0, 0])
    with pytest.raises(ValueError):
        netgraph.ncut(g, [0, 1])


# ---------------------------------------------------------------- sweep cut


def _brute_prefix_profile(g, order):
    phis = []
    for k in range(1, g.n):
        phis.append(brute_conductance(g, order[:k]))
    return np.array(phis)


def test_sweep_cut_barbell_minimum_at_bridge():
    g = barbell_graph(5)
    prof = netgraph.sweep_cut(g, exact_fiedler(g))
    assert prof.min_conductance == pytest.approx(1 / 21)
    assert set(prof.best_prefix.tolist()) in ({0, 1, 2, 3, 4},
                                              {5, 6, 7, 8, 9})


def test_sweep_cut_matches_prefix_recomputation():
    for seed in range(10):
        g = random_connected_graph(25, 0.2, seed=100 + seed)
        v = rng_for(seed).standard_normal(g.n)
        prof = netgraph.sweep_cut(g, v)
        want = _brute_prefix_profile(g, prof.order)
        np.testing.assert_allclose(prof.conductance, want, rtol=1e-12)
        assert prof.argmin == int(np.argmin(want))


def test_sweep_cut_path_graph_middle_cut():
    g = path_graph(4)
    prof = netgraph.sweep_cut(g, exact_fiedler(g))
    assert prof.min_conductance == pytest.approx(1 / 3)
    assert len(prof.conductance) == 3


def test_sweep_cut_constant_vector_degenerates_to_index_order():
    g = cycle_graph(6)
    prof = netgraph.sweep_cut(g, np.ones(6))
    np.testing.assert_array_equal(prof.order, np.arange(6))
    assert len(prof.conductance) == 5


def test_sweep_cut_values_in_unit_interval():
    g = random_connected_graph(20, 0.25, seed=16)
    prof = netgraph.sweep_cut(g, rng_for(17).standard_normal(g.n))
    assert np.all(prof.conductance >= 0) and np.all(prof.conductance <= 1)


def test_sweep_cut_rejects_wrong_length():
    with pytest.raises(ValueError):
        netgraph.sweep_cut(path_graph(4), np.ones(3))


def test_sweep_profile_csv(tmp_path):
    g = path_graph(5)
    prof = netgraph.sweep_cut(g, exact_fiedler(g))
    out = tmp_path / "profile.csv"
    prof.to_csv(out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "prefix_size,conductance"
    assert len(lines) == g.n  # header + n - 1 rows


def test_cheeger_inequality_on_exhaustive_small_graphs():
    # sweep set from the exact second eigenvector vs the exhaustive optimum
    graphs = [path_graph(8), cycle_graph(9), barbell_graph(4),
              random_connected_graph(10, 0.35, seed=18),
              random_connected_graph(11, 0.3, seed=19)]
    for g in graphs:
        best = 1.0
        nodes = range(g.n)
        for k in range(1, g.n):
            for S in itertools.combinations(nodes, k):
                best = min(best, brute_conductance(g, S))
        prof = netgraph.sweep_cut(g, exact_fiedler(g))
        assert prof.min_conductance <= 2 * np.sqrt(best) + 1e-12
