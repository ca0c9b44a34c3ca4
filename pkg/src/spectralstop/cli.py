"""Command-line front end: synthetic runs, graph experiments, traces.

Exit codes: 0 success, 2 usage/configuration error, 1 numerical failure.
All floating-point output uses 17 significant digits so values round-trip.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from spectralstop import bounds, matcore, netgraph, subspace, synth, tasks


def _fmt(x):
    if x is None:
        return ""
    return f"{x:.17g}"


def _default_seed():
    return int(os.environ.get("SPECTRAL_STOP_SEED", "0"))


def _eps_list(value):
    return [float(tok) for tok in value.split(",")]


def _load_graph(path):
    g = netgraph.load_edge_list(path)
    return netgraph.largest_connected_component(g)


def cmd_synth(args):
    spec = synth.SyntheticSpec(n=args.n, r=args.r, rho=args.rho,
                               seed=args.seed)
    inst = synth.make_instance(spec)
    config = subspace.StoppingConfig(epsilon=args.eps, r=args.r, p=args.p,
                                     mode=args.mode, max_iters=args.max_iters)
    width = args.r + args.p
    Q0 = subspace.default_start(spec.n, width, seed=args.seed)
    rows = []

    def record(t, Q, report):
        Qr = Q[:, : args.r]
        rows.append({
            "t": t,
            "dist2": matcore.dist_2(Qr, inst.V),
            "dist2inf_proxy": matcore.dist_2inf_proxy(Qr, inst.V),
            "res2_max": float(report.res2_per_column.max()),
            "res2inf": report.res2inf,
        })

    result = subspace.run(inst.operator(), config, Q0=Q0, callback=record)
    t_elapsed = result.state.t
    C = bounds.tail_assumption_constant(inst.basis, inst.eigenvalues, args.r,
                                        T_max=min(args.tmax, max(t_elapsed, 1)))
    gt = bounds.measure_ground_truth(inst.V, inst.eigenvalues, Q0,
                                     C_assumption=C,
                                     v_r1=inst.basis[:, args.r])
    out = Path(args.out)
    with open(out, "w") as fh:
        fh.write("t,dist2,dist2inf_proxy,res2_max,res2inf,"
                 "rate1,rate2,rate3,rate_naive,C_assumption\n")
        for row in rows:
            t = row["t"]
            fh.write(",".join([
                str(t), _fmt(row["dist2"]), _fmt(row["dist2inf_proxy"]),
                _fmt(row["res2_max"]), _fmt(row["res2inf"]),
                _fmt(bounds.rate1(gt, t)), _fmt(bounds.rate2(gt, t)),
                _fmt(bounds.rate3(gt, t)), _fmt(bounds.rate_naive(gt, t)),
                _fmt(C)]) + "\n")
    summary = {"n": args.n, "r": args.r, "rho": args.rho, "seed": args.seed,
               "epsilon": args.eps, "mode": args.mode,
               "t_stop": result.t_stop, "t_comp": result.t_comp,
               "t_naive": result.t_naive, "exhausted": result.exhausted,
               "C_assumption": C}
    print(json.dumps(summary))
    return 0


def _oracle_path(graph_path):
    return Path(str(graph_path) + ".oracle.npy")


def _centrality_oracle(g, graph_path, seed):
    """Iterate to machine precision and cache the leading eigenvector."""
    cache = _oracle_path(graph_path)
    if cache.exists():
        v = np.load(cache)
        if len(v) == g.n:
            return v
    config = subspace.StoppingConfig(epsilon=1e-13, r=1, p=3,
                                     mode="naive_l2", max_iters=100000)
    _, result = tasks.eigenvector_centrality(g, config, seed=seed)
    v = subspace.sign_fix(result.state.Q[:, 0])
    np.save(cache, v)
    return v


def cmd_centrality(args):
    g = _load_graph(args.graph)
    oracle = None
    if args.oracle or _oracle_path(args.graph).exists():
        oracle = _centrality_oracle(g, args.graph, args.seed)
        oracle_ranking = tasks.rank_by_scores(oracle)
    summaries = []
    for eps in args.eps:
        config = subspace.StoppingConfig(epsilon=eps, r=1, p=args.p,
                                         mode=args.mode,
                                         max_iters=args.max_iters)
        taus = []

        def record(t, Q, report):
            if oracle is not None:
                approx = tasks.rank_by_scores(subspace.sign_fix(Q[:, 0]))
                taus.append(tasks.kendall_tau_dist(approx, oracle_ranking))

        connected, bipartite = tasks.is_bipartite_connected(g)
        if not connected:
            raise ValueError("input graph must be connected after LCC")
        op = g.adjacency()
        if bipartite:
            op = tasks.ShiftedAdjacency(op)
        result = subspace.run(op, config, seed=args.seed, callback=record)
        ranking = tasks.rank_by_scores(
            subspace.sign_fix(result.state.Q[:, 0]))
        ratio = (result.t_comp / result.t_naive
                 if result.t_comp and result.t_naive else None)
        summary = {"dataset": str(args.graph), "mode": args.mode,
                   "epsilon": eps, "t_stop": result.t_stop,
                   "t_comp": result.t_comp, "t_naive": result.t_naive,
                   "ratio": ratio, "n": g.n, "m": g.m}
        if oracle is not None:
            summary["kendall_dist_full"] = tasks.kendall_tau_dist(
                ranking, oracle_ranking)
            summary["kendall_dist_top"] = tasks.truncated_kendall_dist(
                ranking, oracle_ranking)
        summaries.append(summary)
        if args.out:
            stem = Path(args.out)
            trace_path = stem.with_name(f"{stem.name}_eps{eps:g}.csv")
            with open(trace_path, "w") as fh:
                fh.write("t,res2_max,res2inf,kendall_dist\n")
                for i, rep in enumerate(result.trace):
                    tau = _fmt(taus[i]) if taus else ""
                    fh.write(f"{rep.t},{_fmt(float(rep.res2_per_column.max()))},"
                             f"{_fmt(rep.res2inf)},{tau}\n")
    print(json.dumps(summaries if len(summaries) > 1 else summaries[0]))
    return 0


def cmd_cluster(args):
    g = _load_graph(args.graph)
    assignment, cut_value, result = tasks.spectral_clustering_pipeline(
        g, r=args.r, rho=args.rho, epsilon=args.eps, mode=args.mode,
        p=args.p, seed=args.seed, max_iters=args.max_iters)
    summary = {"dataset": str(args.graph), "mode": args.mode,
               "epsilon": args.eps, "r": args.r,
               "rho": args.rho if args.rho is not None else tasks.default_rho(g),
               "t_stop": result.t_stop, "t_comp": result.t_comp,
               "t_naive": result.t_naive, "ncut": cut_value,
               "cluster_sizes": np.bincount(assignment.labels,
                                            minlength=args.r).tolist()}
    if args.out:
        np.savetxt(args.out, assignment.labels, fmt="%d")
    print(json.dumps(summary))
    return 0


def cmd_sweep(args):
    g = _load_graph(args.graph)
    eps = args.eps
    mode = args.mode
    if args.relaxed_l2:
        eps = args.eps * np.sqrt(g.n)
        mode = "naive_l2"
    profile, result = tasks.bipartition_experiment(
        g, epsilon=eps, mode=mode, p=args.p, seed=args.seed,
        max_iters=args.max_iters)
    summary = {"dataset": str(args.graph), "mode": mode, "epsilon": eps,
               "t_stop": result.t_stop, "t_comp": result.t_comp,
               "t_naive": result.t_naive,
               "min_conductance": profile.min_conductance,
               "argmin_prefix": int(profile.argmin + 1)}
    if args.out:
        profile.to_csv(args.out)
    print(json.dumps(summary))
    return 0


def cmd_verify_assumption(args):
    import scipy.sparse.linalg as spla

    g = _load_graph(args.graph)
    A = g.adjacency()
    k = args.r + 1
    w, V = spla.eigsh(A.to_scipy().astype(np.float64), k=max(k, 2),
                      which="LA", tol=0)
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    C = bounds.verify_assumption1(A, V[:, : args.r], w, T_max=args.tmax)
    print(json.dumps({"dataset": str(args.graph), "r": args.r,
                      "tmax": args.tmax, "C": C}))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spectralstop",
        description="Subspace iteration with a row-wise stopping criterion")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=_default_seed())
        p.add_argument("--p", type=int, default=3,
                       help="augmentation columns")
        p.add_argument("--mode", default="both",
                       choices=["two_inf", "naive_l2", "both"])
        p.add_argument("--max-iters", type=int, default=5000)
        p.add_argument("--out", default=None)

    p = sub.add_parser("synth", help="synthetic instance run with rate trace")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--rho", type=float, default=0.95)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--tmax", type=int, default=500,
                   help="cap for the assumption-constant sweep")
    common(p)
    p.set_defaults(func=cmd_synth, out="synth_trace.csv")

    p = sub.add_parser("centrality", help="eigenvector centrality experiment")
    p.add_argument("--graph", required=True)
    p.add_argument("--eps", type=_eps_list, required=True,
                   help="comma-separated tolerance list")
    p.add_argument("--oracle", action="store_true",
                   help="compute and cache a machine-precision eigenvector")
    common(p)
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("cluster", help="CPQR spectral clustering")
    p.add_argument("--graph", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--eps", type=float, default=1e-2)
    common(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("sweep", help="sweep-cut bipartitioning")
    p.add_argument("--graph", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--relaxed-l2", action="store_true",
                   help="use the sqrt(n)-relaxed l2 stopping rule")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify-assumption",
                       help="measure the tail-power assumption constant")
    p.add_argument("--graph", required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--tmax", type=int, default=200)
    common(p)
    p.set_defaults(func=cmd_verify_assumption)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, matcore.PowerIterationError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
