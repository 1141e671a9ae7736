"""Dense ground-truth computations for small graphs.

Everything here works from the Laplacian directly and never touches the
hierarchy index, so it can be used to check it. All routines refuse graphs
above :data:`DENSE_LIMIT` vertices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import OracleError
from .graph import Graph
from .hierarchy import HierarchyTree
from .index import NodeLabel

DENSE_LIMIT = 4096
WALK_LIMIT = 1024
DECOMPOSITION_LIMIT = 256


def _guard(n: int, limit: int = DENSE_LIMIT) -> None:
    if n > limit:
        raise OracleError(f"dense oracle refuses n={n} (limit {limit})")


def _solve(a: np.ndarray, b: np.ndarray, *, sym: bool = True) -> np.ndarray:
    try:
        return sla.solve(a, b, assume_a="pos" if sym else "gen", check_finite=False)
    except (np.linalg.LinAlgError, sla.LinAlgError) as exc:
        raise OracleError(f"singular system: {exc}") from None


def pseudoinverse(g: Graph) -> np.ndarray:
    """Moore-Penrose pseudoinverse of the Laplacian via ``(L + J/n)^-1 - J/n``."""
    _guard(g.n)
    n = g.n
    full = g.laplacian() + 1.0 / n
    inv = _solve(full, np.eye(n))
    inv -= 1.0 / n
    return (inv + inv.T) / 2


def pseudoinverse_bd(g: Graph, s: int, t: int) -> float:
    """``(e_s - e_t)' (L^+)^2 (e_s - e_t)`` from one dense solve."""
    _guard(g.n)
    n = g.n
    x = np.zeros(n)
    x[s] += 1.0
    x[t] -= 1.0
    y = _solve(g.laplacian() + 1.0 / n, x)
    y -= y.mean()
    return float(y @ y)


def pseudoinverse_bd_all(g: Graph) -> np.ndarray:
    """All-pairs matrix of :func:`pseudoinverse_bd`, computed column-difference by column-difference."""
    P = pseudoinverse(g)
    out = np.empty((g.n, g.n))
    for s in range(g.n):
        d = P - P[:, [s]]
        out[s] = np.einsum("ij,ij->j", d, d)
    return out


def spectral_bd(g: Graph, s: int, t: int) -> float:
    """Same quantity from an eigendecomposition; a second opinion for tiny graphs."""
    _guard(g.n)
    lam, vec = np.linalg.eigh(g.laplacian())
    proj = vec[s] - vec[t]
    keep = lam > 1e-9 * max(1.0, lam.max())
    return float(np.sum(proj[keep] ** 2 / lam[keep] ** 2))


def grounded_laplacian(g: Graph, v: int) -> tuple[np.ndarray, np.ndarray]:
    """``L`` with row and column ``v`` removed, and the kept vertex ids."""
    keep = np.delete(np.arange(g.n), v)
    L = g.laplacian()
    return L[np.ix_(keep, keep)], keep


def grounded_bd(g: Graph, v: int, s: int, t: int) -> float:
    """Distance from the inverse of the Laplacian grounded at ``v``.

    A query endpoint equal to ``v`` contributes nothing (its coordinate is
    removed with the grounded row).
    """
    _guard(g.n)
    if g.n == 1:
        return 0.0
    Lv, keep = grounded_laplacian(g, v)
    x = np.zeros(g.n)
    x[s] += 1.0
    x[t] -= 1.0
    y = _solve(Lv, x[keep])
    return float(y @ y - y.sum() ** 2 / g.n)


def _transition(g: Graph) -> sp.csr_matrix:
    return sp.diags(1.0 / g.degrees) @ g.to_scipy()


def _walk_value(delta: np.ndarray, n: int) -> float:
    return float(delta @ delta - delta.sum() ** 2 / n)


def truncated_walk_bd(g: Graph, s: int, t: int, steps: int) -> float:
    """Random-walk series truncated after ``steps`` transitions.

    Uses the partial sum ``sum_{i<=steps} (e_s - e_t)' P^i D^-1`` as the
    difference of the two degree-normalised visit distributions.
    """
    _guard(g.n, WALK_LIMIT)
    if steps < 0:
        raise ValueError("steps must be >= 0")
    PT = _transition(g).T.tocsr()
    r = np.zeros(g.n)
    r[s] += 1.0
    r[t] -= 1.0
    acc = r.copy()
    for _ in range(steps):
        r = PT @ r
        acc += r
    return _walk_value(acc / g.degrees, g.n)


@dataclass(frozen=True)
class SeriesEstimate:
    value: float
    steps: int
    converged: bool


def walk_series_bd(g: Graph, s: int, t: int, *, start: int | None = None, rtol: float = 1e-8,
                   max_steps: int = 1 << 24) -> SeriesEstimate:
    """Evaluate the random-walk series with a doubling truncation schedule.

    Each estimate averages the partial sums at ``T - 1`` and ``T``, which
    converges on bipartite graphs too (the plain partial sums oscillate there
    because ``P`` has eigenvalue -1). Doubling stops once two successive
    estimates agree to ``rtol``.
    """
    _guard(g.n, WALK_LIMIT)
    n = g.n
    T = start if start is not None else 64 * n
    PT = _transition(g).T.tocsr()
    r = np.zeros(n)
    r[s] += 1.0
    r[t] -= 1.0
    if s == t:
        return SeriesEstimate(0.0, 0, True)
    acc = r.copy()
    done = 0
    prev = None
    while True:
        for _ in range(T - done):
            r = PT @ r
            acc += r
        done = T
        est = _walk_value((acc - 0.5 * r) / g.degrees, n)
        if prev is not None and abs(est - prev) <= rtol * max(abs(est), 1e-300):
            return SeriesEstimate(est, T, True)
        if 2 * T > max_steps:
            return SeriesEstimate(est, T, False)
        prev = est
        T *= 2


def walk_series_trace(g: Graph, s: int, t: int, schedule: Sequence[int]) -> list[float]:
    """Averaged series estimates at each truncation in ``schedule`` (ascending)."""
    _guard(g.n, WALK_LIMIT)
    PT = _transition(g).T.tocsr()
    r = np.zeros(g.n)
    r[s] += 1.0
    r[t] -= 1.0
    acc = r.copy()
    done = 0
    out = []
    for T in schedule:
        for _ in range(T - done):
            r = PT @ r
            acc += r
        done = T
        out.append(_walk_value((acc - 0.5 * r) / g.degrees, g.n))
    return out


def direct_label_oracle(g: Graph, t: HierarchyTree, v: int) -> NodeLabel:
    """Label of ``v`` from one dense solve on its proper descendants.

    ``m`` is returned in the DFS-relative layout used by the index.
    """
    desc = t.descendants(v)
    _guard(len(desc))
    S = desc[1:]
    L = g.laplacian() if g.n <= DENSE_LIMIT else None
    if L is None:
        raise OracleError("graph too large for a dense Laplacian")
    a = -L[v, S]
    if len(S):
        mp = _solve(L[np.ix_(S, S)], a)
    else:
        mp = np.zeros(0)
    return NodeLabel(np.concatenate([[1.0], mp]), float(g.degrees[v] - a @ mp))


def all_direct_labels(g: Graph, t: HierarchyTree) -> list[NodeLabel]:
    _guard(g.n)
    L = g.laplacian()
    out = []
    for v in range(g.n):
        S = t.descendants(v)[1:]
        a = -L[v, S]
        mp = _solve(L[np.ix_(S, S)], a) if len(S) else np.zeros(0)
        out.append(NodeLabel(np.concatenate([[1.0], mp]), float(g.degrees[v] - a @ mp)))
    return out


@dataclass(frozen=True)
class DecompositionResult:
    deviation: float
    max_offblock: float
    cut_vertex: bool
    split_steps: int

    def __float__(self) -> float:
        return self.deviation


def _offblock(mat: np.ndarray, labels: np.ndarray) -> float:
    if labels.max(initial=0) == 0:
        return 0.0
    mask = labels[:, None] != labels[None, :]
    return float(np.abs(mat[mask]).max())


def cut_decomposition_check(g: Graph, v: int, order: Sequence[int], *,
                            block_tol: float = 1e-12) -> DecompositionResult:
    """Remove vertices one at a time and re-assemble the grounded inverse.

    After each removal of ``c`` from the current set ``R``, the rank-one term
    ``[m; 1] f^-1 [m; 1]'`` with ``m = L_{R-c}^-1 a_c`` and
    ``f = d_c - a_c' m`` is added to a running sum; the sum plus the inverse of
    the remaining block must reproduce ``L_v^-1``. Whenever the remaining
    vertices fall apart into several components, that inverse must be block
    diagonal; a violation raises :class:`OracleError`.
    """
    _guard(g.n, DECOMPOSITION_LIMIT)
    n = g.n
    order = [int(x) for x in order]
    if sorted(order) != sorted(set(range(n)) - {v}) or len(order) != n - 1:
        raise OracleError("order must be a permutation of all vertices except the grounded one")
    L = g.laplacian()
    A = g.to_scipy()
    Lv, keep = grounded_laplacian(g, v)
    target = np.zeros((n, n))
    target[np.ix_(keep, keep)] = _solve(Lv, np.eye(n - 1))

    def split(R):
        if len(R) == 0:
            return np.zeros(0, dtype=int)
        return connected_components(A[R][:, R], directed=False)[1]

    lab0 = split(keep)
    cut_vertex = bool(lab0.max(initial=0) > 0)
    worst_block = _offblock(target[np.ix_(keep, keep)], lab0)
    split_steps = int(cut_vertex)

    acc = np.zeros((n, n))
    alive = np.zeros(n, dtype=bool)
    alive[keep] = True
    worst = 0.0
    for c in order:
        alive[c] = False
        R = np.flatnonzero(alive)
        a = -L[c, R]
        if len(R):
            block_inv = _solve(L[np.ix_(R, R)], np.eye(len(R)))
            m = block_inv @ a
        else:
            block_inv = np.zeros((0, 0))
            m = np.zeros(0)
        f = L[c, c] - a @ m
        vec = np.zeros(n)
        vec[R] = m
        vec[c] = 1.0
        acc += np.outer(vec, vec) / f
        total = acc.copy()
        total[np.ix_(R, R)] += block_inv
        worst = max(worst, float(np.abs(total - target).max()))
        if len(R) > 1:
            lab = split(R)
            if lab.max() > 0:
                split_steps += 1
                worst_block = max(worst_block, _offblock(block_inv, lab))
    scale = max(1.0, float(np.abs(target).max()))
    if worst_block > block_tol * scale:
        raise OracleError(f"grounded inverse not block diagonal across components: {worst_block!r}")
    return DecompositionResult(worst, worst_block, cut_vertex, split_steps)
