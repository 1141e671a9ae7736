"""Reference kernels in plain numpy.

Same signatures as :mod:`bdindex._kernels_numba`; selected when numba is
missing or ``BDINDEX_DISABLE_NUMBA`` is set.
"""

import heapq

import numpy as np


def build_labels(order, start, size, parent, root, indptr, indices, weights, degrees,
                 offsets, values, f, tol):
    """Fill ``values``/``f`` bottom-up. Returns the first vertex whose pivot breaks down, else -1."""
    n = len(order)
    sigma = np.zeros(n)
    for i in range(n - 1, -1, -1):
        v = order[i]
        base = start[v]
        end = base + size[v]
        off = offsets[v]
        lo, hi = indptr[v], indptr[v + 1]
        nb = indices[lo:hi]
        wt = weights[lo:hi]
        pos = start[nb]
        inside = (pos > base) & (pos < end)
        nb, wt, pos = nb[inside], wt[inside], pos[inside]

        touched = {}
        for x, w, px in zip(nb, wt, pos):
            u = x
            while u != v:
                sigma[u] += w * values[offsets[u] + px - start[u]]
                touched[u] = start[u]
                u = parent[u]
        for u in sorted(touched, key=touched.__getitem__):
            a = off + start[u] - base
            b = offsets[u]
            values[a:a + size[u]] += (sigma[u] / f[u]) * values[b:b + size[u]]
            sigma[u] = 0.0
        values[off] = 1.0

        fv = degrees[v]
        for w, px in zip(wt, pos):
            fv -= w * values[off + px - base]
        f[v] = fv
        if v != root and not fv > tol * degrees[v]:
            return v
    return -1


def accumulate_tau(start, size, parent, offsets, values, f, root, s, out):
    """Add column ``s`` of the root-grounded inverse into ``out`` (DFS-position indexed).

    Returns the half-open DFS range ``(lo, hi)`` that may have been written.
    """
    lo = hi = 0
    ps = start[s]
    u = s
    while u != root:
        su = start[u]
        k = size[u]
        b = offsets[u]
        out[su:su + k] += (values[b + ps - su] / f[u]) * values[b:b + k]
        lo, hi = su, su + k
        u = parent[u]
    return lo, hi


def evaluate_pair(ts, lo_s, hi_s, tt, lo_t, hi_t, n):
    """``(||d||^2 - (1'd)^2/n, ||d||^2)`` for ``d = ts - tt`` over the union of both ranges."""
    if hi_s - lo_s == 0 and hi_t - lo_t == 0:
        return 0.0, 0.0
    if hi_s - lo_s == 0:
        spans = ((lo_t, hi_t),)
    elif hi_t - lo_t == 0:
        spans = ((lo_s, hi_s),)
    elif lo_s < hi_t and lo_t < hi_s:
        spans = ((min(lo_s, lo_t), max(hi_s, hi_t)),)
    else:
        spans = tuple(sorted(((lo_s, hi_s), (lo_t, hi_t))))
    sq = 0.0
    sm = 0.0
    for a, b in spans:
        d = ts[a:b] - tt[a:b]
        sq += float(np.dot(d, d))
        sm += float(d.sum())
    return sq - sm * sm / n, sq


def clear(out, lo, hi):
    out[lo:hi] = 0.0


def batch_bd(start, size, parent, offsets, values, f, root, S, T, ts, tt, out_bd, out_sq):
    """Untimed batch evaluation; ``ts``/``tt`` must be zero on entry and are zero on exit."""
    n = len(start)
    cur = -1
    lo_s = hi_s = 0
    for i in range(len(S)):
        s, t = S[i], T[i]
        if s != cur:
            ts[lo_s:hi_s] = 0.0
            lo_s, hi_s = accumulate_tau(start, size, parent, offsets, values, f, root, s, ts)
            cur = s
        lo_t, hi_t = accumulate_tau(start, size, parent, offsets, values, f, root, t, tt)
        out_bd[i], out_sq[i] = evaluate_pair(ts, lo_s, hi_s, tt, lo_t, hi_t, n)
        tt[lo_t:hi_t] = 0.0
    ts[lo_s:hi_s] = 0.0


def min_degree_elimination(indptr, indices):
    """Minimum-degree elimination with explicit fill, ties to the smaller id.

    Returns ``(order, nb_ptr, nb_idx)`` like the numba kernel.
    """
    n = len(indptr) - 1
    adj = [set(indices[indptr[v]:indptr[v + 1]].tolist()) for v in range(n)]
    heap = [(len(adj[v]), v) for v in range(n)]
    heapq.heapify(heap)
    alive = [True] * n
    order = []
    nb_ptr = [0]
    nb_idx = []
    while heap:
        deg, v = heapq.heappop(heap)
        if not alive[v] or deg != len(adj[v]):
            continue
        nb = adj[v]
        alive[v] = False
        order.append(v)
        nb_idx.extend(sorted(nb))
        nb_ptr.append(len(nb_idx))
        for u in nb:
            au = adj[u]
            au.discard(v)
            au |= nb
            au.discard(u)
            heapq.heappush(heap, (len(au), u))
        adj[v] = set()
    return (np.asarray(order, dtype=np.int64), np.asarray(nb_ptr, dtype=np.int64),
            np.asarray(nb_idx, dtype=np.int64))
