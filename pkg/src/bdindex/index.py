"""Per-vertex labels ``(m_v, f_v)`` and the index that stores them.

``m_v`` is kept over the subtree of ``v`` in DFS order, so entry ``i`` belongs
to ``tree.order[tree.dfs_start[v] + i]`` and entry 0 is ``v`` itself (always
1). ``f_v`` is the Schur pivot left at ``v`` after eliminating its proper
descendants. All labels live in one flat float64 array.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._accel import get_backend
from .errors import HierarchyError, IndexFormatError, NumericalBreakdownError
from .graph import Graph
from .hierarchy import HierarchyTree, validate_hierarchy

BREAKDOWN_TOL = 1e-12
ROOT_PIVOT_TOL = 1e-6
NEGATIVE_ENTRY_TOL = 1e-12


@dataclass(frozen=True)
class NodeLabel:
    m: np.ndarray
    f: float


@dataclass(frozen=True, eq=False)
class BDIndex:
    tree: HierarchyTree
    values: np.ndarray
    offsets: np.ndarray
    f: np.ndarray
    labels: tuple[str, ...]
    degrees: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.tree.n

    @property
    def root(self) -> int:
        return self.tree.root

    @property
    def stored_entries(self) -> int:
        return len(self.values)

    def label(self, v: int) -> NodeLabel:
        b = self.offsets[v]
        return NodeLabel(self.values[b:b + self.tree.dfs_size[v]], float(self.f[v]))

    def m_at(self, u: int, x: int) -> float:
        """Entry of ``m_u`` belonging to vertex ``x`` (0 when ``x`` is outside the subtree of ``u``)."""
        t = self.tree
        if not t.is_ancestor(u, x):
            return 0.0
        return float(self.values[self.offsets[u] + t.dfs_start[x] - t.dfs_start[u]])

    def vertex_id(self, label) -> int:
        try:
            return self._ids[str(label)]
        except KeyError:
            raise KeyError(f"unknown vertex label {label!r}") from None

    @property
    def _ids(self) -> dict[str, int]:
        ids = self.__dict__.get("_id_cache")
        if ids is None:
            ids = {lab: i for i, lab in enumerate(self.labels)}
            object.__setattr__(self, "_id_cache", ids)
        return ids

    def same_as(self, other: "BDIndex") -> bool:
        """Bit-exact equality of tree, labels, and id map."""
        return (
            self.tree.same_as(other.tree)
            and np.array_equal(self.offsets, other.offsets)
            and self.values.tobytes() == other.values.tobytes()
            and self.f.tobytes() == other.f.tobytes()
            and self.labels == other.labels
        )


def dfs_offsets(t: HierarchyTree) -> np.ndarray:
    """Start of each vertex's label in the flat array (owners laid out in DFS order)."""
    sizes = t.dfs_size[t.order]
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    off = np.empty(t.n, dtype=np.int64)
    off[t.order] = starts
    return off


def build_index(g: Graph, t: HierarchyTree, *, backend: str | None = None,
                validate: bool = True) -> BDIndex:
    """Compute every label bottom-up over the hierarchy.

    Raises :class:`NumericalBreakdownError` if a non-root pivot is not
    positive, which happens only for an invalid hierarchy or disconnected input.
    """
    if validate:
        rep = validate_hierarchy(g, t)
        if not rep.ok:
            raise HierarchyError(f"invalid hierarchy: {rep}")
    kern = get_backend(backend)
    off = dfs_offsets(t)
    values = np.zeros(int(t.dfs_size.sum()), dtype=np.float64)
    f = np.zeros(t.n, dtype=np.float64)
    bad = kern.build_labels(
        t.order, t.dfs_start, t.dfs_size, t.parent, t.root,
        g.indptr, g.indices, g.weights, g.degrees, off, values, f, BREAKDOWN_TOL,
    )
    if bad >= 0:
        raise NumericalBreakdownError(g.labels[bad], float(f[bad]))
    for arr in (values, f, off):
        arr.setflags(write=False)
    return BDIndex(t, values, off, f, g.labels, g.degrees)


def check_labels(idx: BDIndex, *, degrees: np.ndarray | None = None) -> list[str]:
    """Invariant violations among the stored labels (empty list when all hold)."""
    t = idx.tree
    bad = []
    heads = idx.values[idx.offsets]
    for v in np.flatnonzero(heads != 1.0)[:10]:
        bad.append(f"m[0] of {idx.labels[v]} is {heads[v]!r}, expected 1")
    if len(idx.values) and idx.values.min() < -NEGATIVE_ENTRY_TOL:
        k = int(np.argmin(idx.values))
        owner = t.order[np.searchsorted(idx.offsets[t.order], k, side="right") - 1]
        bad.append(f"negative label entry {idx.values[k]!r} in m of {idx.labels[owner]}")
    nonroot = np.ones(t.n, dtype=bool)
    nonroot[t.root] = False
    piv = idx.f[nonroot]
    if not np.all(piv > 0):
        v = np.flatnonzero(nonroot & ~(idx.f > 0))[0]
        bad.append(f"non-positive pivot f={idx.f[v]!r} at {idx.labels[v]}")
    d = idx.degrees if degrees is None else degrees
    if d is not None and abs(idx.f[t.root]) > ROOT_PIVOT_TOL * max(1.0, float(d[t.root])):
        bad.append(f"root pivot {idx.f[t.root]!r} is not ~0")
    return bad


def require_valid_labels(idx: BDIndex) -> None:
    bad = check_labels(idx)
    if bad:
        raise IndexFormatError("index invariant violated: " + "; ".join(bad))
