"""Single-pair and batch biharmonic-distance queries over a :class:`BDIndex`.

A query for ``(s, t)`` walks the two ancestor chains, scatters each stored
label into a dense scratch vector (the column of the inverse Laplacian
grounded at the hierarchy root), and combines the two columns. The root is
skipped during accumulation because its pivot is zero.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components
import scipy.sparse as sp

from ._accel import get_backend
from .errors import BDError, QueryError
from .graph import Graph
from .hierarchy import validate_hierarchy
from .index import BDIndex

NEGATIVE_CLAMP_TOL = 1e-9


class IndexGraphMismatchError(BDError, ValueError):
    pass


@dataclass(frozen=True)
class QueryResult:
    s: int
    t: int
    bd: float
    elapsed: float | None = None

    def as_row(self, labels: Sequence[str]) -> dict:
        row = {"s": labels[self.s], "t": labels[self.t], "bd": self.bd}
        if self.elapsed is not None:
            row["micros"] = self.elapsed * 1e6
        return row


class QueryEngine:
    """Owns the scratch buffers for one worker. Not thread-safe; make one per thread."""

    def __init__(self, idx: BDIndex, backend: str | None = None):
        self.idx = idx
        self.kern = get_backend(backend)
        t = idx.tree
        self._args = (t.dfs_start, t.dfs_size, t.parent, idx.offsets, idx.values, idx.f, t.root)
        self.ts = np.zeros(idx.n)
        self.tt = np.zeros(idx.n)
        self._cur_s = -1
        self._span_s = (0, 0)

    def _check(self, v: int) -> int:
        v = int(v)
        if not 0 <= v < self.idx.n:
            raise QueryError(f"vertex id {v} out of range [0, {self.idx.n})")
        return v

    def tau_dfs(self, s: int) -> tuple[np.ndarray, tuple[int, int]]:
        """Column ``s`` of the grounded inverse in DFS-position order plus the written range.

        The returned array is the engine's scratch buffer and is overwritten by
        the next call.
        """
        s = self._check(s)
        k = self.kern
        if s != self._cur_s:
            k.clear(self.ts, *self._span_s)
            self._span_s = tuple(k.accumulate_tau(*self._args, s, self.ts))
            self._cur_s = s
        return self.ts, self._span_s

    def query(self, s: int, t: int) -> QueryResult:
        s, t = self._check(s), self._check(t)
        k = self.kern
        t0 = time.perf_counter()
        if s != self._cur_s:
            k.clear(self.ts, *self._span_s)
            self._span_s = tuple(k.accumulate_tau(*self._args, s, self.ts))
            self._cur_s = s
        lo_t, hi_t = k.accumulate_tau(*self._args, t, self.tt)
        raw, sq = k.evaluate_pair(self.ts, self._span_s[0], self._span_s[1], self.tt, lo_t, hi_t,
                                  self.idx.n)
        k.clear(self.tt, lo_t, hi_t)
        elapsed = time.perf_counter() - t0
        return QueryResult(s, t, _clamp(raw, sq, s, t), elapsed)


def _clamp(raw: float, sq: float, s: int, t: int, position: int | None = None) -> float:
    if raw >= 0.0:
        return float(raw)
    if raw >= -NEGATIVE_CLAMP_TOL * sq:
        return 0.0
    raise QueryError(f"negative distance {raw!r} for ({s}, {t}); index is corrupt", position)


def _engine(idx: BDIndex) -> QueryEngine:
    eng = idx.__dict__.get("_engine")
    if eng is None:
        eng = QueryEngine(idx)
        object.__setattr__(idx, "_engine", eng)
    return eng


def accumulate_tau(idx: BDIndex, s: int, out: np.ndarray | None = None) -> np.ndarray:
    """Column ``s`` of the root-grounded inverse Laplacian, indexed by vertex id.

    Entries outside the subtrees of ``s``'s ancestors stay zero and the root
    entry is always zero.
    """
    eng = QueryEngine(idx)
    dfs, _ = eng.tau_dfs(s)
    res = dfs[idx.tree.dfs_start]
    if out is None:
        return res
    out += res
    return out


def query_bd(idx: BDIndex, s: int, t: int) -> QueryResult:
    return _engine(idx).query(s, t)


def _validate_pairs(idx: BDIndex, pairs) -> tuple[np.ndarray, np.ndarray]:
    S = np.empty(len(pairs), dtype=np.int64)
    T = np.empty(len(pairs), dtype=np.int64)
    for i, (s, t) in enumerate(pairs):
        for v in (s, t):
            if not (isinstance(v, (int, np.integer)) and 0 <= v < idx.n):
                raise QueryError(f"vertex id {v!r} out of range [0, {idx.n})", position=i)
        S[i], T[i] = s, t
    return S, T


def batch_query(idx: BDIndex, pairs: Sequence[tuple[int, int]], *, workers: int = 1,
                backend: str | None = None) -> list[QueryResult]:
    """Timed queries, results in input order. Values do not depend on ``workers``."""
    S, T = _validate_pairs(idx, pairs)
    if len(S) == 0:
        return []
    workers = max(1, min(int(workers), len(S)))

    def run(lo, hi):
        eng = QueryEngine(idx, backend)
        return [eng.query(S[i], T[i]) for i in range(lo, hi)]

    if workers == 1:
        return run(0, len(S))
    bounds = np.linspace(0, len(S), workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        chunks = list(pool.map(run, bounds[:-1], bounds[1:]))
    return [r for chunk in chunks for r in chunk]


def pair_bds(idx: BDIndex, S, T, *, backend: str | None = None) -> np.ndarray:
    """Untimed vectorised variant of :func:`batch_query` returning just the distances.

    Consecutive pairs sharing a source reuse its accumulated column.
    """
    S = np.ascontiguousarray(S, dtype=np.int64)
    T = np.ascontiguousarray(T, dtype=np.int64)
    if len(S) != len(T):
        raise ValueError("S and T differ in length")
    if len(S) == 0:
        return np.zeros(0)
    for arr in (S, T):
        if arr.min() < 0 or arr.max() >= idx.n:
            i = int(np.flatnonzero((S < 0) | (S >= idx.n) | (T < 0) | (T >= idx.n))[0])
            raise QueryError("vertex id out of range", position=i)
    kern = get_backend(backend)
    t = idx.tree
    bd = np.empty(len(S))
    sq = np.empty(len(S))
    kern.batch_bd(t.dfs_start, t.dfs_size, t.parent, idx.offsets, idx.values, idx.f, t.root,
                  S, T, np.zeros(idx.n), np.zeros(idx.n), bd, sq)
    neg = np.flatnonzero(bd < 0)
    if len(neg):
        bad = neg[bd[neg] < -NEGATIVE_CLAMP_TOL * sq[neg]]
        if len(bad):
            i = int(bad[0])
            _clamp(bd[i], sq[i], int(S[i]), int(T[i]), i)
        bd[neg] = 0.0
    return bd


def all_pairs_bd(idx: BDIndex, *, backend: str | None = None) -> np.ndarray:
    """Dense ``n x n`` matrix of query results for every ordered pair."""
    n = idx.n
    S = np.repeat(np.arange(n), n)
    T = np.tile(np.arange(n), n)
    return pair_bds(idx, S, T, backend=backend).reshape(n, n)


def check_index_matches(idx: BDIndex, g: Graph) -> None:
    """Raise :class:`IndexGraphMismatchError` unless ``idx`` plausibly came from ``g``.

    Compares vertex counts and id maps, re-checks the separator property on
    ``g``'s edges, and checks that every leaf pivot equals its degree.
    """
    if idx.n != g.n:
        raise IndexGraphMismatchError(f"index has {idx.n} vertices, graph has {g.n}")
    if idx.labels != g.labels:
        k = next(i for i, (a, b) in enumerate(zip(idx.labels, g.labels)) if a != b)
        raise IndexGraphMismatchError(
            f"id maps differ at internal id {k}: index {idx.labels[k]!r}, graph {g.labels[k]!r}")
    rep = validate_hierarchy(g, idx.tree)
    if not rep.ok:
        raise IndexGraphMismatchError(f"index hierarchy does not fit the graph: {rep}")
    leaves = np.flatnonzero(idx.tree.dfs_size == 1)
    off = leaves[idx.f[leaves] != g.degrees[leaves]]
    if len(off):
        v = int(off[0])
        raise IndexGraphMismatchError(
            f"leaf {g.labels[v]} has pivot {idx.f[v]!r} but degree {g.degrees[v]!r}")


def edge_centrality(idx: BDIndex, g: Graph, top_k: int | None = None,
                    *, backend: str | None = None) -> list[tuple[tuple[int, int], float]]:
    """Every edge scored by the distance between its endpoints, highest first.

    Ties are broken by ``(min id, max id)`` ascending.
    """
    u, w, _ = g.edges()
    if len(u) == 0:
        return []
    bd = pair_bds(idx, u, w, backend=backend)
    rank = np.lexsort((w, u, -bd))
    if top_k is not None:
        rank = rank[:top_k]
    return [((int(u[k]), int(w[k])), float(bd[k])) for k in rank]


@dataclass(frozen=True)
class RemovalReport:
    removed: int
    lcc_fraction: float
    components: int
    reachability: float
    seed: int


def removal_report(g: Graph, ranked: Iterable[tuple[tuple[int, int], float]], fraction: float,
                   *, seed: int = 42, samples: int = 1000) -> RemovalReport:
    """Delete the top ``fraction`` of edges and measure what is left.

    Reports the largest-component share of vertices, the component count, and
    the fraction of ``samples`` seeded random vertex pairs still connected.
    """
    if not 0 <= fraction <= 1:
        raise ValueError("fraction must lie in [0, 1]")
    ranked = list(ranked)
    k = int(np.floor(fraction * g.m))
    if k > len(ranked):
        raise ValueError("ranking does not cover enough edges for the requested fraction")
    drop = {e for e, _ in ranked[:k]}
    u, w, x = g.edges()
    keep = np.array([(int(a), int(b)) not in drop for a, b in zip(u, w)], dtype=bool)
    mat = sp.coo_matrix((x[keep], (u[keep], w[keep])), shape=(g.n, g.n))
    ncomp, lab = connected_components(mat, directed=False)
    sizes = np.bincount(lab)
    rng = np.random.default_rng(seed)
    a = rng.integers(0, g.n, samples)
    b = rng.integers(0, g.n, samples)
    reach = float(np.mean(lab[a] == lab[b])) if samples else float("nan")
    return RemovalReport(k, float(sizes.max() / g.n), int(ncomp), reach, seed)


def sample_pairs(n: int, k: int, seed: int = 42) -> list[tuple[int, int]]:
    """``k`` distinct unordered pairs ``s < t`` drawn uniformly without replacement."""
    total = n * (n - 1) // 2
    if k < 0 or k > total:
        raise QueryError(f"cannot sample {k} distinct pairs from {total} available")
    rng = np.random.default_rng(seed)
    flat = rng.choice(total, size=k, replace=False)
    # row i owns flat indices [first[i], first[i] + n - 1 - i)
    rows = np.arange(n, dtype=np.int64)
    first = rows * (2 * n - rows - 1) // 2
    s = np.searchsorted(first, flat, side="right") - 1
    t = flat - first[s] + s + 1
    return [(int(a), int(b)) for a, b in zip(s, t)]
