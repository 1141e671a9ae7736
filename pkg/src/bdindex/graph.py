"""Immutable undirected weighted graphs and edge-list loaders.

Vertices carry dense internal ids ``0..n-1`` assigned in first-appearance
order; the original labels are kept in :attr:`Graph.labels` so results can be
reported in the caller's vocabulary.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import (
    DisconnectedGraphError,
    EmptyGraphError,
    GraphFormatError,
    SelfLoopError,
)

FORMATS = ("plain", "dimacs")


@dataclass(frozen=True, eq=False)
class Graph:
    """Connected undirected graph stored as symmetric CSR arrays.

    ``indices[indptr[v]:indptr[v+1]]`` are the neighbours of ``v`` sorted
    ascending, with matching positive ``weights``.
    """

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    degrees: np.ndarray
    labels: tuple[str, ...]
    _label_ids: dict = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    @property
    def id_map(self) -> dict[str, int]:
        return dict(self._label_ids)

    def vertex_id(self, label) -> int:
        try:
            return self._label_ids[str(label)]
        except KeyError:
            raise KeyError(f"unknown vertex label {label!r}") from None

    def neighbors(self, v: int) -> list[tuple[int, float]]:
        """Neighbours of ``v`` as ``(id, weight)`` pairs sorted by id."""
        if not 0 <= v < self.n:
            raise IndexError(f"vertex id {v} out of range [0, {self.n})")
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return [(int(w), float(x)) for w, x in zip(self.indices[lo:hi], self.weights[lo:hi])]

    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Each undirected edge once as arrays ``(u, w, weight)`` with ``u < w``."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        keep = rows < self.indices
        return rows[keep], self.indices[keep].copy(), self.weights[keep].copy()

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.weights, self.indices, self.indptr), shape=(self.n, self.n))

    def laplacian(self) -> np.ndarray:
        """Dense combinatorial Laplacian ``D - A`` (small graphs only)."""
        lap = -self.to_scipy().toarray()
        lap[np.diag_indices(self.n)] = self.degrees
        return lap

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[Sequence],
        labels: Sequence | None = None,
        *,
        check_connected: bool = True,
    ) -> "Graph":
        """Build from ``(u, w)`` or ``(u, w, weight)`` tuples over ids ``0..n-1``."""
        us, ws, xs = [], [], []
        for e in edges:
            u, w = int(e[0]), int(e[1])
            x = float(e[2]) if len(e) > 2 else 1.0
            us.append(u)
            ws.append(w)
            xs.append(x)
        if labels is None:
            labels = [str(i) for i in range(n)]
        return _assemble(n, np.asarray(us, dtype=np.int64), np.asarray(ws, dtype=np.int64),
                         np.asarray(xs, dtype=np.float64), [str(x) for x in labels],
                         check_connected=check_connected)


def _assemble(n, us, ws, xs, labels, *, check_connected=True, line_of=None) -> Graph:
    if n == 0:
        raise EmptyGraphError("graph has no vertices")
    if len(us) and (us.min() < 0 or ws.min() < 0 or max(us.max(), ws.max()) >= n):
        raise GraphFormatError("edge endpoint out of range")
    loops = np.flatnonzero(us == ws)
    if len(loops):
        k = int(loops[0])
        raise SelfLoopError(f"self-loop on vertex {labels[us[k]]!r}",
                            line=None if line_of is None else line_of[k])
    if len(xs) and not (np.all(np.isfinite(xs)) and np.all(xs > 0)):
        raise GraphFormatError("edge weights must be finite and positive")
    lo, hi = np.minimum(us, ws), np.maximum(us, ws)
    key = lo * n + hi
    order = np.argsort(key, kind="stable")
    key, lo, hi, xs = key[order], lo[order], hi[order], xs[order]
    if len(key):
        dup = np.flatnonzero(key[1:] == key[:-1])
        bad = dup[xs[dup] != xs[dup + 1]]
        if len(bad):
            k = int(bad[0])
            raise GraphFormatError(
                f"edge ({labels[lo[k]]}, {labels[hi[k]]}) listed with conflicting weights "
                f"{xs[k]} and {xs[k + 1]}",
                line=None if line_of is None else line_of[order[k + 1]],
            )
        first = np.ones(len(key), dtype=bool)
        first[1:] = key[1:] != key[:-1]
        lo, hi, xs = lo[first], hi[first], xs[first]
    rows = np.concatenate([lo, hi])
    cols = np.concatenate([hi, lo])
    vals = np.concatenate([xs, xs])
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    mat.sort_indices()
    indptr = mat.indptr.astype(np.int64)
    indices = mat.indices.astype(np.int64)
    weights = mat.data.astype(np.float64)
    degrees = np.bincount(np.repeat(np.arange(n), np.diff(indptr)), weights=weights, minlength=n)
    for arr in (indptr, indices, weights, degrees):
        arr.setflags(write=False)
    g = Graph(indptr, indices, weights, degrees, tuple(labels),
              {lab: i for i, lab in enumerate(labels)})
    if check_connected:
        _require_connected(g)
    return g


def _components(g: Graph) -> np.ndarray:
    _, comp = connected_components(g.to_scipy(), directed=False)
    return comp


def is_connected(g: Graph) -> bool:
    """True iff a BFS from vertex 0 reaches every vertex."""
    if g.n <= 1:
        return True
    return bool(np.all(_components(g) == 0))


def _require_connected(g: Graph) -> None:
    if g.n <= 1:
        return
    comp = _components(g)
    other = np.flatnonzero(comp != comp[0])
    if len(other):
        raise DisconnectedGraphError(g.labels[0], g.labels[int(other[0])])


def _label(token: str, lineno: int) -> str:
    if not token.isdigit():
        raise GraphFormatError(f"vertex label {token!r} is not a nonnegative integer", line=lineno)
    return str(int(token))


def _weight(token: str, lineno: int) -> float:
    try:
        x = float(token)
    except ValueError:
        raise GraphFormatError(f"bad weight {token!r}", line=lineno) from None
    if not (math.isfinite(x) and x > 0):
        raise GraphFormatError(f"weight must be finite and positive, got {token!r}", line=lineno)
    return x


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise GraphFormatError(f"input is not valid UTF-8: {exc}") from None


def load_edge_list(source: BinaryIO | bytes | str | os.PathLike, format: str = "plain") -> Graph:
    """Parse a plain edge list or a DIMACS ``.gr`` file into a :class:`Graph`.

    ``source`` may be a path, raw bytes, or a binary stream. Internal ids follow
    first appearance; reciprocal or repeated edges collapse to one undirected
    edge and must agree on weight.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown graph format {format!r}; expected one of {FORMATS}")
    text = _read_text(source)
    ids: dict[str, int] = {}
    us, ws, xs, line_of = [], [], [], []

    def intern(lab):
        if lab not in ids:
            ids[lab] = len(ids)
        return ids[lab]

    declared_n = None
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line:
            continue
        toks = line.split()
        if format == "plain":
            if line[0] in "#%":
                continue
            if len(toks) not in (2, 3):
                raise GraphFormatError(f"expected '<u> <w> [<weight>]', got {line!r}", line=lineno)
            a, b = _label(toks[0], lineno), _label(toks[1], lineno)
            x = _weight(toks[2], lineno) if len(toks) == 3 else 1.0
        else:
            tag = toks[0]
            if tag == "c":
                continue
            if tag == "p":
                if len(toks) != 4 or toks[1] != "sp" or not (toks[2].isdigit() and toks[3].isdigit()):
                    raise GraphFormatError(f"bad problem line {line!r}", line=lineno)
                if declared_n is not None:
                    raise GraphFormatError("duplicate problem line", line=lineno)
                declared_n = int(toks[2])
                continue
            if tag != "a":
                raise GraphFormatError(f"unknown line type {tag!r}", line=lineno)
            if declared_n is None:
                raise GraphFormatError("arc before 'p sp' header", line=lineno)
            if len(toks) != 4:
                raise GraphFormatError(f"expected 'a <u> <w> <weight>', got {line!r}", line=lineno)
            a, b = _label(toks[1], lineno), _label(toks[2], lineno)
            x = _weight(toks[3], lineno)
        if a == b:
            raise SelfLoopError(f"self-loop on vertex {a!r}", line=lineno)
        us.append(intern(a))
        ws.append(intern(b))
        xs.append(x)
        line_of.append(lineno)

    if format == "dimacs":
        if declared_n is None:
            raise GraphFormatError("missing 'p sp <n> <m>' header")
        if declared_n == 0:
            raise EmptyGraphError("graph has no vertices")
        if len(ids) > declared_n:
            raise GraphFormatError(f"header declares {declared_n} vertices but arcs name {len(ids)}")
        if len(ids) < declared_n:
            missing = next(str(k) for k in range(1, declared_n + 1) if str(k) not in ids)
            present = next(iter(ids), None)
            if present is None:
                if declared_n == 1:
                    ids["1"] = 0
                else:
                    raise DisconnectedGraphError("1", "2")
            else:
                raise DisconnectedGraphError(present, missing)
    if not ids:
        raise EmptyGraphError("graph has no edges")
    labels = list(ids)
    return _assemble(len(labels), np.asarray(us, dtype=np.int64), np.asarray(ws, dtype=np.int64),
                     np.asarray(xs, dtype=np.float64), labels, line_of=line_of)


def neighbors(g: Graph, v: int) -> list[tuple[int, float]]:
    return g.neighbors(v)


def write_edge_list(g: Graph, sink) -> None:
    """Write ``g`` as a plain edge list using its external labels."""
    u, w, x = g.edges()
    lines = []
    for a, b, c in zip(u, w, x):
        tail = "" if c == 1.0 else f" {c!r}"
        lines.append(f"{g.labels[a]} {g.labels[b]}{tail}\n")
    data = "".join(lines).encode()
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)
