"""Benchmark the compiled CSR kernels against the scipy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--n 50000] [--avg-degree 20]
        [--widths 1,4,16] [--repeats 20]

Builds a random symmetric CSR matrix, runs matvec / matmat through both
backends, checks they agree, and prints per-call timings with the speedup.
"""

import argparse
import timeit

import numpy as np

from spectralstop import kernels
from spectralstop import _kernels_np as fallback
from spectralstop.matcore import SparseSymMatrix

try:
    from spectralstop import _kernels as compiled
except ImportError:
    compiled = None


def random_csr(n, avg_degree, seed):
    rng = np.random.default_rng(seed)
    m = n * avg_degree // 2
    u = rng.integers(0, n, m)
    v = rng.integers(0, n, m)
    keep = u != v
    edges = np.column_stack([u[keep], v[keep]])
    A = SparseSymMatrix.from_edges(n, edges)
    return A.row_ptr, A.col_idx, A.values


def bench(fn, args, repeats):
    times = timeit.repeat(lambda: fn(*args), number=1, repeat=repeats)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=50_000)
    ap.add_argument("--avg-degree", type=int, default=20)
    ap.add_argument("--widths", type=str, default="1,4,16")
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    row_ptr, col_idx, values = random_csr(args.n, args.avg_degree, args.seed)
    nnz = len(values)
    print(f"active backend: {kernels.BACKEND}")
    print(f"matrix: n = {args.n}, nnz = {nnz}")
    if compiled is None:
        print("compiled extension not built; benchmarking the fallback only")

    rng = np.random.default_rng(args.seed + 1)
    for w in [int(x) for x in args.widths.split(",")]:
        if w == 1:
            x = rng.standard_normal(args.n)
            ops = [("fallback", fallback.csr_matvec)]
            if compiled is not None:
                ops.append(("compiled", compiled.csr_matvec))
        else:
            x = np.ascontiguousarray(rng.standard_normal((args.n, w)))
            ops = [("fallback", fallback.csr_matmat)]
            if compiled is not None:
                ops.append(("compiled", compiled.csr_matmat))

        results = {}
        outputs = {}
        for name, fn in ops:
            results[name] = bench(fn, (row_ptr, col_idx, values, x),
                                  args.repeats)
            outputs[name] = fn(row_ptr, col_idx, values, x)
        if len(outputs) == 2:
            err = np.abs(outputs["compiled"] - outputs["fallback"]).max()
            assert err <= 1e-10, f"backend mismatch: {err}"
        line = f"width {w:3d}: " + "  ".join(
            f"{name} {results[name] * 1e3:8.3f} ms" for name, _ in ops)
        if len(results) == 2:
            line += f"  speedup x{results['fallback'] / results['compiled']:.2f}"
        print(line)


if __name__ == "__main__":
    main()
