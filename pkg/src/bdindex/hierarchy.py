"""Elimination hierarchies over the vertices of a graph.

A hierarchy is a rooted spanning tree in which every graph edge joins a vertex
to one of its tree ancestors. Two constructions are provided: recursive vertex
separators (cut vertices become a chain, residual components hang below it)
and a minimum-degree elimination tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Protocol, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, shortest_path

from ._accel import get_backend
from .errors import HierarchyError
from .graph import Graph

STRATEGIES = ("separator", "min-degree")


@dataclass(frozen=True, eq=False)
class HierarchyTree:
    parent: np.ndarray
    root: int
    children: tuple[np.ndarray, ...] = field(repr=False)
    dfs_start: np.ndarray = field(repr=False)
    dfs_size: np.ndarray = field(repr=False)
    order: np.ndarray = field(repr=False)
    depth: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.parent)

    @property
    def dfs_pos(self) -> np.ndarray:
        return self.dfs_start

    @property
    def height(self) -> int:
        return int(self.depth.max()) + 1

    def is_ancestor(self, u: int, w: int) -> bool:
        """True iff ``u`` is an ancestor of ``w`` (inclusive)."""
        s = self.dfs_start[u]
        return bool(s <= self.dfs_start[w] < s + self.dfs_size[u])

    def ancestors(self, v: int) -> Iterator[int]:
        """Yield ``v`` and then its ancestors up to the root."""
        while True:
            yield v
            p = int(self.parent[v])
            if p == v:
                return
            v = p

    def descendants(self, v: int) -> np.ndarray:
        s = self.dfs_start[v]
        return self.order[s:s + self.dfs_size[v]]

    def same_as(self, other: "HierarchyTree") -> bool:
        return (self.root == other.root and np.array_equal(self.parent, other.parent)
                and np.array_equal(self.dfs_start, other.dfs_start)
                and np.array_equal(self.dfs_size, other.dfs_size))

    @classmethod
    def from_parent(cls, parent: Sequence[int] | np.ndarray) -> "HierarchyTree":
        """Lay out a tree given ``parent[v]`` (the root points to itself).

        Children are visited in ascending order of their smallest descendant id,
        which fixes the DFS preorder used to address label vectors.
        """
        parent = np.asarray(parent, dtype=np.int64).copy()
        n = len(parent)
        if n == 0:
            raise HierarchyError("empty hierarchy")
        if parent.min() < 0 or parent.max() >= n:
            raise HierarchyError("parent id out of range")
        roots = np.flatnonzero(parent == np.arange(n))
        if len(roots) != 1:
            raise HierarchyError(f"expected exactly one root, found {len(roots)}")
        root = int(roots[0])

        kids: list[list[int]] = [[] for _ in range(n)]
        for v in range(n):
            if v != root:
                kids[parent[v]].append(v)

        # any traversal order first, to get subtree minima bottom-up
        seen = [root]
        for v in seen:
            seen.extend(kids[v])
            if len(seen) > n:
                break
        if len(seen) != n:
            raise HierarchyError("parent links contain a cycle or do not span all vertices")
        min_desc = np.arange(n, dtype=np.int64)
        for v in reversed(seen):
            if v != root:
                p = parent[v]
                if min_desc[v] < min_desc[p]:
                    min_desc[p] = min_desc[v]

        order = np.empty(n, dtype=np.int64)
        start = np.empty(n, dtype=np.int64)
        size = np.ones(n, dtype=np.int64)
        depth = np.zeros(n, dtype=np.int64)
        stack = [root]
        pos = 0
        while stack:
            v = stack.pop()
            order[pos] = v
            start[v] = pos
            pos += 1
            ch = sorted(kids[v], key=min_desc.__getitem__)
            for c in ch:
                depth[c] = depth[v] + 1
            stack.extend(reversed(ch))
        for v in order[::-1]:
            if v != root:
                size[parent[v]] += size[v]

        children = tuple(np.array(sorted(k), dtype=np.int64) for k in kids)
        for arr in (parent, start, size, order, depth):
            arr.setflags(write=False)
        return cls(parent, root, children, start, size, order, depth)


@dataclass(frozen=True)
class HierarchyStats:
    h: int
    s_total: int
    s_avg: float


def hierarchy_stats(t: HierarchyTree) -> HierarchyStats:
    total = int(t.dfs_size.sum())
    return HierarchyStats(h=t.height, s_total=total, s_avg=total / t.n)


# --------------------------------------------------------------------------
# validation


@dataclass
class HierarchyReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "ok" if self.ok else "; ".join(self.violations)


def validate_hierarchy(g: Graph, t: HierarchyTree, *, limit: int = 10) -> HierarchyReport:
    """Check tree shape, DFS layout, and the separator property edge by edge."""
    bad: list[str] = []
    n = g.n
    lab = g.labels
    if t.n != n:
        return HierarchyReport([f"tree has {t.n} vertices, graph has {n}"])
    parent = np.asarray(t.parent)
    start = np.asarray(t.dfs_start)
    size = np.asarray(t.dfs_size)
    order = np.asarray(t.order)

    roots = np.flatnonzero(parent == np.arange(n))
    if len(roots) != 1 or roots[0] != t.root:
        bad.append(f"expected exactly one root at {t.root}, found {len(roots)}")
        return HierarchyReport(bad)
    if not np.array_equal(np.sort(order), np.arange(n)):
        bad.append("DFS order is not a permutation of the vertices")
        return HierarchyReport(bad)
    if not np.array_equal(start[order], np.arange(n)):
        bad.append("dfs_start disagrees with DFS order")
        return HierarchyReport(bad)
    if start[t.root] != 0 or size[t.root] != n:
        bad.append("root interval does not cover all vertices")
    nonroot = np.flatnonzero(parent != np.arange(n))
    p = parent[nonroot]
    inside = (start[p] < start[nonroot]) & (start[nonroot] + size[nonroot] <= start[p] + size[p])
    for v in nonroot[~inside][:limit]:
        bad.append(f"interval of {lab[v]} not nested strictly inside its parent {lab[parent[v]]}")
    # sizes must equal 1 + sum of children sizes; guards against acyclic-looking garbage
    child_sum = np.zeros(n, dtype=np.int64)
    np.add.at(child_sum, p, size[nonroot])
    for v in np.flatnonzero(size != child_sum + 1)[:limit]:
        bad.append(f"subtree size of {lab[v]} inconsistent with its children")

    u, w, _ = g.edges()
    anc = ((start[u] <= start[w]) & (start[w] < start[u] + size[u])) | (
        (start[w] <= start[u]) & (start[u] < start[w] + size[w]))
    for k in np.flatnonzero(~anc)[:limit]:
        bad.append(f"separator property violated on edge ({lab[u[k]]}, {lab[w[k]]})")
    return HierarchyReport(bad)


# --------------------------------------------------------------------------
# separator-based construction


@dataclass(frozen=True, eq=False)
class Subgraph:
    """Induced subgraph handed to a separator provider.

    ``vertices`` holds sorted global ids; ``adj`` is the induced adjacency in
    the matching local numbering.
    """

    vertices: np.ndarray
    adj: sp.csr_matrix

    def __len__(self) -> int:
        return len(self.vertices)

    def degree(self) -> np.ndarray:
        return np.diff(self.adj.indptr)


class SeparatorProvider(Protocol):
    def __call__(self, sub: Subgraph) -> Iterable[int]:
        """Return global ids of a nonempty proper vertex subset of ``sub``."""


def _min_degree_vertex(sub: Subgraph) -> int:
    return int(sub.vertices[int(np.argmin(sub.degree()))])


def bfs_bisection_separator(sub: Subgraph) -> list[int]:
    """Level-set separator from a BFS rooted at a pseudo-peripheral vertex.

    For each BFS level the candidate cut is the part of that level adjacent to
    the next one; the smallest candidate leaving both sides within
    ``ceil(2|V|/3)`` wins. Falls back to the most balanced candidate, and to
    the minimum-degree vertex when the BFS has no interior level.
    """
    nloc = len(sub)
    if nloc < 2:
        return [int(sub.vertices[0])]
    adj = sub.adj
    d0 = shortest_path(adj, method="D", unweighted=True, indices=0)
    far = int(np.argmax(np.where(np.isfinite(d0), d0, -1)))
    lev = shortest_path(adj, method="D", unweighted=True, indices=far)
    if not np.all(np.isfinite(lev)):
        raise HierarchyError("separator called on a disconnected subgraph")
    lev = lev.astype(np.int64)
    top = int(lev.max())
    if top < 2:
        return [_min_degree_vertex(sub)]

    coo = adj.tocoo()
    up = lev[coo.col] == lev[coo.row] + 1
    has_up = np.zeros(nloc, dtype=bool)
    has_up[coo.row[up]] = True
    cut = np.bincount(lev[has_up], minlength=top + 1)
    per_level = np.bincount(lev, minlength=top + 1)
    above = nloc - np.cumsum(per_level)  # vertices strictly deeper than each level

    cap = math.ceil(2 * nloc / 3)
    best = None
    for ell in range(1, top):
        s, b = int(cut[ell]), int(above[ell])
        a = nloc - s - b
        key = (0, s, 0, ell) if max(a, b) <= cap else (1, max(a, b), s, ell)
        if best is None or key < best[0]:
            best = (key, ell)
    ell = best[1]
    chosen = np.flatnonzero((lev == ell) & has_up)
    return sorted(int(x) for x in sub.vertices[chosen])


def build_separator_hierarchy(
    g: Graph, sep: SeparatorProvider | Callable[[Subgraph], Iterable[int]] | None = None
) -> HierarchyTree:
    """Recursive vertex-cut hierarchy.

    Each cut set becomes a chain in ascending id order (smallest id on top);
    every connected component left after removing it is processed the same
    way beneath the chain's bottom vertex.
    """
    sep = sep or bfs_bisection_separator
    n = g.n
    full = g.to_scipy()
    parent = np.full(n, -1, dtype=np.int64)
    stack: list[tuple[np.ndarray, int]] = [(np.arange(n, dtype=np.int64), -1)]
    rounds = 0
    while stack:
        rounds += 1
        if rounds > n:
            raise HierarchyError("separator recursion exceeded n rounds")
        verts, p = stack.pop()
        if len(verts) == 1:
            v = int(verts[0])
            parent[v] = v if p < 0 else p
            continue
        adj = full[verts][:, verts].tocsr()
        sub = Subgraph(verts, adj)
        cut = sorted({int(x) for x in sep(sub)})
        local = np.searchsorted(verts, cut)
        proper = (
            0 < len(cut) < len(verts)
            and np.all(local < len(verts))
            and np.array_equal(verts[np.minimum(local, len(verts) - 1)], cut)
        )
        if not proper:
            cut = [_min_degree_vertex(sub)]
            local = np.searchsorted(verts, cut)
        prev = p
        for c in cut:
            parent[c] = c if prev < 0 else prev
            prev = c
        keep = np.ones(len(verts), dtype=bool)
        keep[local] = False
        rest = verts[keep]
        if len(rest) == 0:
            continue
        ncomp, lab = connected_components(adj[keep][:, keep], directed=False)
        for k in range(ncomp - 1, -1, -1):
            stack.append((rest[lab == k], prev))
    if np.any(parent < 0):
        raise HierarchyError("separator hierarchy left vertices unassigned")
    return HierarchyTree.from_parent(parent)


# --------------------------------------------------------------------------
# minimum-degree construction


# dense bitset rows cost n^2/8 bytes; above this the set-based kernel is used
BITSET_LIMIT = 1 << 15


def min_degree_order(g: Graph, backend: str | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Minimum-degree elimination with fill-in; ties go to the smaller id.

    Returns the elimination order and, as CSR ``(ptr, idx)`` over elimination
    steps, the filled neighbourhood of each vertex when it was eliminated.
    """
    kern = get_backend(backend)
    if g.n > BITSET_LIMIT:
        kern = get_backend("numpy")
    return kern.min_degree_elimination(g.indptr, g.indices)


def build_min_degree_hierarchy(g: Graph, backend: str | None = None) -> HierarchyTree:
    """Elimination tree of the minimum-degree ordering.

    ``parent(v)`` is the earliest-eliminated filled-graph neighbour of ``v``
    that outlives it; the last vertex eliminated is the root.
    """
    order, ptr, idx = min_degree_order(g, backend)
    rank = np.empty(g.n, dtype=np.int64)
    rank[order] = np.arange(g.n)
    parent = np.empty(g.n, dtype=np.int64)
    for step, v in enumerate(order):
        nb = idx[ptr[step]:ptr[step + 1]]
        parent[v] = nb[np.argmin(rank[nb])] if len(nb) else v
    roots = np.flatnonzero(parent == np.arange(g.n))
    if len(roots) != 1:
        raise HierarchyError("minimum-degree elimination produced a forest (disconnected graph?)")
    return HierarchyTree.from_parent(parent)


def build_hierarchy(g: Graph, strategy: str = "separator",
                    sep: SeparatorProvider | None = None) -> HierarchyTree:
    if strategy == "separator":
        return build_separator_hierarchy(g, sep)
    if strategy == "min-degree":
        return build_min_degree_hierarchy(g)
    raise ValueError(f"unknown hierarchy strategy {strategy!r}; expected one of {STRATEGIES}")


def dump_tree(t: HierarchyTree, labels: Sequence[str] | None = None) -> str:
    """Text dump, one ``<vertex> <parent> <dfs_start> <dfs_size>`` line per vertex, root first."""
    name = (lambda v: labels[v]) if labels is not None else str
    return "".join(
        f"{name(v)} {name(int(t.parent[v]))} {t.dfs_start[v]} {t.dfs_size[v]}\n" for v in t.order
    )
