"""``bd`` command-line front end.

Exit status: 0 on success, 1 for bad input or failed validation, 2 for usage
errors (including unknown vertex labels).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from . import oracle
from ._accel import backend_name, get_backend
from .errors import BDError
from .graph import Graph, load_edge_list
from .hierarchy import STRATEGIES, build_hierarchy, dump_tree, hierarchy_stats
from .index import BDIndex, build_index
from .query import (
    IndexGraphMismatchError,
    batch_query,
    check_index_matches,
    edge_centrality,
    pair_bds,
    query_bd,
    removal_report,
    sample_pairs,
)
from .storage import deserialize, serialize

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load_graph(args) -> Graph:
    fmt = args.format
    if fmt is None:
        fmt = "dimacs" if str(args.graph).endswith(".gr") else "plain"
    return load_edge_list(args.graph, format=fmt)


def _out(line: str = "") -> None:
    sys.stdout.write(line + "\n")


def _resolve(idx: BDIndex, label: str) -> int:
    try:
        return idx.vertex_id(label)
    except KeyError:
        raise UsageError(f"unknown vertex label {label!r}") from None


def _read_pairs(path) -> list[tuple[str, str]]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            toks = line.split()
            if not toks or toks[0].startswith("#"):
                continue
            if len(toks) != 2:
                raise UsageError(f"{path}:{lineno}: expected '<s> <t>', got {line.strip()!r}")
            pairs.append((toks[0], toks[1]))
    return pairs


def _warm(idx: BDIndex) -> None:
    # first call compiles the numba kernels; keep that out of timings
    query_bd(idx, 0, idx.n - 1)


def cmd_build(args) -> int:
    g = _load_graph(args)
    t0 = time.perf_counter()
    tree = build_hierarchy(g, args.strategy)
    t1 = time.perf_counter()
    idx = build_index(g, tree)
    t2 = time.perf_counter()
    nbytes = serialize(idx, args.output)
    st = hierarchy_stats(tree)
    if args.dump_tree:
        with open(args.dump_tree, "w", encoding="utf-8") as fh:
            fh.write(dump_tree(tree, g.labels))
    _out(f"n: {g.n}")
    _out(f"m: {g.m}")
    _out(f"strategy: {args.strategy}")
    _out(f"h: {st.h}")
    _out(f"s_avg: {st.s_avg:.6g}")
    _out(f"label_entries: {idx.stored_entries}")
    _out(f"bytes: {nbytes}")
    _out(f"hierarchy_seconds: {t1 - t0:.6f}")
    _out(f"label_seconds: {t2 - t1:.6f}")
    _out(f"build_seconds: {t2 - t0:.6f}")
    return EXIT_OK


def cmd_query(args) -> int:
    idx = deserialize(args.index)
    if args.pair:
        raw = [tuple(args.pair)]
    else:
        raw = _read_pairs(args.pairs)
    pairs = [(_resolve(idx, s), _resolve(idx, t)) for s, t in raw]
    if pairs:
        _warm(idx)
    results = batch_query(idx, pairs, workers=args.workers)
    timed = not args.no_timing
    buf = io.StringIO()
    if args.out == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "t", "bd", "micros"] if timed else ["s", "t", "bd"])
        for r in results:
            row = r.as_row(idx.labels)
            cells = [row["s"], row["t"], repr(row["bd"])]
            w.writerow(cells + [f"{row['micros']:.3f}"] if timed else cells)
    else:
        for r in results:
            row = r.as_row(idx.labels)
            if timed:
                row["micros"] = round(row["micros"], 3)
            else:
                del row["micros"]
            buf.write(json.dumps(row) + "\n")
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_bench(args) -> int:
    idx = deserialize(args.index)
    g = _load_graph(args)
    check_index_matches(idx, g)
    if args.samples < 1:
        raise UsageError("sample count must be >= 1")
    pairs = sample_pairs(idx.n, args.samples, args.seed)
    _warm(idx)
    results = batch_query(idx, pairs, workers=args.workers)
    micros = np.array([r.elapsed for r in results]) * 1e6
    _out(f"seed: {args.seed}")
    _out(f"samples: {len(pairs)}")
    _out(f"backend: {backend_name(get_backend())}")
    _out(f"workers: {args.workers}")
    _out(f"query_micros_mean: {micros.mean():.3f}")
    _out(f"query_micros_median: {np.median(micros):.3f}")
    _out(f"query_micros_p99: {np.percentile(micros, 99):.3f}")
    if g.n <= oracle.DENSE_LIMIT:
        P = oracle.pseudoinverse(g)
        worst = 0.0
        for r in results:
            d = P[:, r.s] - P[:, r.t]
            ref = float(d @ d)
            worst = max(worst, abs(r.bd - ref) / max(abs(ref), 1e-300))
        _out(f"max_relative_error: {worst:.3e}")
    else:
        _out("max_relative_error: skipped (n above dense oracle limit)")
    return EXIT_OK


def _label_check(g: Graph, idx: BDIndex) -> tuple[float, int]:
    worst, where = 0.0, -1
    refs = oracle.all_direct_labels(g, idx.tree)
    for v, ref in enumerate(refs):
        lab = idx.label(v)
        scale = 1.0 + float(np.abs(ref.m).max())
        dev = max(float(np.abs(lab.m - ref.m).max()), abs(lab.f - ref.f)) / scale
        if dev > worst or where < 0:
            worst, where = dev, v
    return worst, where


def cmd_validate(args) -> int:
    g = _load_graph(args)
    if g.n > oracle.DENSE_LIMIT:
        _out(f"refused: n={g.n} exceeds the dense oracle limit {oracle.DENSE_LIMIT}")
        return EXIT_FAIL
    if args.index:
        idx = deserialize(args.index)
        if idx.n != g.n:
            _out(f"FAIL index has {idx.n} vertices, graph has {g.n}")
            return EXIT_FAIL
    else:
        idx = build_index(g, build_hierarchy(g, args.strategy))
    ok = True

    dev, v = _label_check(g, idx)
    passed = dev <= 1e-9
    ok &= passed
    _out(f"{'PASS' if passed else 'FAIL'} labels worst_deviation={dev:.3e} at vertex {g.labels[v]}")

    if args.all_pairs:
        S, T = np.triu_indices(g.n, 1)
    else:
        pairs = sample_pairs(g.n, min(args.samples, g.n * (g.n - 1) // 2), args.seed)
        S = np.array([p[0] for p in pairs], dtype=np.int64)
        T = np.array([p[1] for p in pairs], dtype=np.int64)
    if len(S):
        got = pair_bds(idx, S, T)
        ref = oracle.pseudoinverse_bd_all(g)[S, T]
        rel = np.abs(got - ref) / np.maximum(1.0, ref)
        k = int(np.argmax(rel))
        passed = rel[k] <= 1e-9
        ok &= passed
        _out(f"{'PASS' if passed else 'FAIL'} distances pairs={len(S)} worst_relative={rel[k]:.3e} "
             f"at ({g.labels[S[k]]}, {g.labels[T[k]]})")

    if g.n <= oracle.DECOMPOSITION_LIMIT and g.n > 1:
        order = [int(x) for x in idx.tree.order[1:]]
        res = oracle.cut_decomposition_check(g, idx.root, order)
        passed = res.deviation <= 1e-10
        ok &= passed
        _out(f"{'PASS' if passed else 'FAIL'} decomposition worst_deviation={res.deviation:.3e}")
    else:
        _out("SKIP decomposition (n outside the check's range)")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_centrality(args) -> int:
    idx = deserialize(args.index)
    g = _load_graph(args)
    check_index_matches(idx, g)
    ranked = edge_centrality(idx, g)
    top = ranked if args.top is None else ranked[:args.top]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["rank", "u", "v", "bd"])
    for i, ((a, b), bd) in enumerate(top, start=1):
        w.writerow([i, g.labels[a], g.labels[b], repr(bd)])
    if args.removal_report is not None:
        rep = removal_report(g, ranked, args.removal_report, seed=args.seed)
        _out(f"# removed_edges: {rep.removed}")
        _out(f"# lcc_fraction: {rep.lcc_fraction:.6f}")
        _out(f"# components: {rep.components}")
        _out(f"# reachability: {rep.reachability:.6f}")
        _out(f"# seed: {rep.seed}")
    return EXIT_OK


def cmd_stats(args) -> int:
    idx = deserialize(args.index)
    st = hierarchy_stats(idx.tree)
    _out(f"n: {idx.n}")
    _out(f"root: {idx.labels[idx.root]}")
    _out(f"h: {st.h}")
    _out(f"s_avg: {st.s_avg:.6g}")
    _out(f"label_entries: {idx.stored_entries}")
    _out(f"bytes: {os.path.getsize(args.index)}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bd", description="Exact biharmonic distance index.")
    sub = p.add_subparsers(dest="command", required=True)

    def graph_opts(sp, required=True):
        sp.add_argument("-g", "--graph", required=required, help="edge list path")
        sp.add_argument("--format", choices=("plain", "dimacs"), default=None,
                        help="graph format (default: dimacs for *.gr, else plain)")

    b = sub.add_parser("build", help="build an index file")
    graph_opts(b)
    b.add_argument("--strategy", choices=STRATEGIES, default="separator")
    b.add_argument("-o", "--output", required=True)
    b.add_argument("--dump-tree", metavar="FILE", help="also write the hierarchy as text")
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="answer distance queries")
    q.add_argument("-i", "--index", required=True)
    src = q.add_mutually_exclusive_group(required=True)
    src.add_argument("-p", "--pair", nargs=2, metavar=("S", "T"))
    src.add_argument("--pairs", metavar="FILE")
    q.add_argument("--out", choices=("jsonl", "csv"), default="jsonl")
    q.add_argument("--workers", type=int, default=1)
    q.add_argument("--no-timing", action="store_true",
                   help="omit the per-query wall-clock column so output is reproducible")
    q.set_defaults(func=cmd_query)

    bn = sub.add_parser("bench", help="time random queries")
    bn.add_argument("-i", "--index", required=True)
    graph_opts(bn)
    bn.add_argument("-k", "--samples", type=int, required=True)
    bn.add_argument("--seed", type=int, default=42)
    bn.add_argument("--workers", type=int, default=1)
    bn.set_defaults(func=cmd_bench)

    v = sub.add_parser("validate", help="compare against dense oracles")
    graph_opts(v)
    v.add_argument("--strategy", choices=STRATEGIES, default="separator")
    v.add_argument("-i", "--index", help="validate this index instead of building one")
    v.add_argument("--all-pairs", action="store_true")
    v.add_argument("--samples", type=int, default=1000)
    v.add_argument("--seed", type=int, default=42)
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("centrality", help="rank edges by endpoint distance")
    c.add_argument("-i", "--index", required=True)
    graph_opts(c)
    c.add_argument("--top", type=int, default=None)
    c.add_argument("--removal-report", type=float, default=None, metavar="F")
    c.add_argument("--seed", type=int, default=42)
    c.set_defaults(func=cmd_centrality)

    s = sub.add_parser("stats", help="summarise an index file")
    s.add_argument("-i", "--index", required=True)
    s.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"bd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BDError, OSError, IndexGraphMismatchError) as exc:
        print(f"bd: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
