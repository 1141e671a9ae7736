"""Time the numba kernels against the pure-numpy fallback.

Covers the three hot paths: minimum-degree elimination, label construction
and batched pair queries. Both backends run on the same graph and hierarchy,
and the script checks that their outputs agree before printing timings.

    python3 benchmarks/bench_kernels.py --n 1500 --pairs 2000
"""

import argparse
import time

import numpy as np

from bdindex.graph import Graph
from bdindex.hierarchy import build_hierarchy, min_degree_order
from bdindex.index import build_index
from bdindex.query import pair_bds, sample_pairs


def er_graph(n: int, seed: int) -> Graph:
    rng = np.random.default_rng(seed)
    p = min(1.0, 2 * np.log(n) / n)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    edges = list(zip(iu[keep].tolist(), ju[keep].tolist()))
    # a spanning path keeps the sample connected
    perm = rng.permutation(n)
    edges += [(int(a), int(b)) for a, b in zip(perm[:-1], perm[1:])]
    return Graph.from_edges(n, edges)


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1500)
    ap.add_argument("--pairs", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    g = er_graph(args.n, args.seed)
    tree = build_hierarchy(g, "separator")
    pairs = sample_pairs(g.n, args.pairs, seed=args.seed)
    S = np.array([p[0] for p in pairs])
    T = np.array([p[1] for p in pairs])
    print(f"graph: n={g.n} m={g.m}, pairs={len(pairs)}")

    # warm-up compiles the numba kernels so timings exclude JIT cost
    idx = build_index(g, tree, backend="numba")
    pair_bds(idx, S[:2], T[:2], backend="numba")
    min_degree_order(g, backend="numba")

    rows = []
    for name, fn in [
        ("min-degree elimination", lambda b: min_degree_order(g, backend=b)),
        ("label construction", lambda b: build_index(g, tree, backend=b, validate=False)),
        ("batched queries", lambda b: pair_bds(idx, S, T, backend=b)),
    ]:
        t_numba = best_of(lambda: fn("numba"), args.repeat)
        t_numpy = best_of(lambda: fn("numpy"), 1)
        rows.append((name, t_numba, t_numpy))

    a = pair_bds(idx, S, T, backend="numba")
    b = pair_bds(idx, S, T, backend="numpy")
    agree = float(np.max(np.abs(a - b) / np.maximum(a, 1e-300)))

    print(f"{'kernel':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, tn, tp in rows:
        print(f"{name:<24}{tn:>12.4f}{tp:>12.4f}{tp / tn:>9.1f}x")
    print(f"max relative disagreement between backends: {agree:.2e}")


if __name__ == "__main__":
    main()
