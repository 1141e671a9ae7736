"""numba-compiled kernels, loop-for-loop equivalents of :mod:`bdindex._kernels_numpy`."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def build_labels(order, start, size, parent, root, indptr, indices, weights, degrees,
                 offsets, values, f, tol):
    n = len(order)
    sigma = np.zeros(n)
    mark = np.zeros(n, dtype=np.bool_)
    touched = np.empty(n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        v = order[i]
        base = start[v]
        end = base + size[v]
        off = offsets[v]
        nt = 0
        for k in range(indptr[v], indptr[v + 1]):
            x = indices[k]
            px = start[x]
            if px <= base or px >= end:
                continue
            w = weights[k]
            u = x
            while u != v:
                sigma[u] += w * values[offsets[u] + px - start[u]]
                if not mark[u]:
                    mark[u] = True
                    touched[nt] = u
                    nt += 1
                u = parent[u]
        tu = touched[:nt]
        perm = np.argsort(start[tu])
        for j in range(nt):
            u = tu[perm[j]]
            coef = sigma[u] / f[u]
            a = off + start[u] - base
            b = offsets[u]
            for k in range(size[u]):
                values[a + k] += coef * values[b + k]
            sigma[u] = 0.0
            mark[u] = False
        values[off] = 1.0

        fv = degrees[v]
        for k in range(indptr[v], indptr[v + 1]):
            px = start[indices[k]]
            if px > base and px < end:
                fv -= weights[k] * values[off + px - base]
        f[v] = fv
        if v != root and not fv > tol * degrees[v]:
            return v
    return -1


@njit(cache=True, nogil=True)
def accumulate_tau(start, size, parent, offsets, values, f, root, s, out):
    lo = 0
    hi = 0
    ps = start[s]
    u = s
    while u != root:
        su = start[u]
        b = offsets[u]
        coef = values[b + ps - su] / f[u]
        for k in range(size[u]):
            out[su + k] += coef * values[b + k]
        lo = su
        hi = su + size[u]
        u = parent[u]
    return lo, hi


@njit(cache=True, nogil=True)
def _span(ts, tt, a, b):
    sq = 0.0
    sm = 0.0
    for k in range(a, b):
        d = ts[k] - tt[k]
        sq += d * d
        sm += d
    return sq, sm


@njit(cache=True, nogil=True)
def evaluate_pair(ts, lo_s, hi_s, tt, lo_t, hi_t, n):
    es = hi_s == lo_s
    et = hi_t == lo_t
    if es and et:
        return 0.0, 0.0
    if es:
        sq, sm = _span(ts, tt, lo_t, hi_t)
    elif et:
        sq, sm = _span(ts, tt, lo_s, hi_s)
    elif lo_s < hi_t and lo_t < hi_s:
        sq, sm = _span(ts, tt, min(lo_s, lo_t), max(hi_s, hi_t))
    else:
        if lo_s < lo_t:
            sq, sm = _span(ts, tt, lo_s, hi_s)
            sq2, sm2 = _span(ts, tt, lo_t, hi_t)
        else:
            sq, sm = _span(ts, tt, lo_t, hi_t)
            sq2, sm2 = _span(ts, tt, lo_s, hi_s)
        sq += sq2
        sm += sm2
    return sq - sm * sm / n, sq


@njit(cache=True, nogil=True)
def clear(out, lo, hi):
    for k in range(lo, hi):
        out[k] = 0.0


@njit(cache=True, nogil=True)
def batch_bd(start, size, parent, offsets, values, f, root, S, T, ts, tt, out_bd, out_sq):
    n = len(start)
    cur = -1
    lo_s = 0
    hi_s = 0
    for i in range(len(S)):
        s = S[i]
        t = T[i]
        if s != cur:
            clear(ts, lo_s, hi_s)
            lo_s, hi_s = accumulate_tau(start, size, parent, offsets, values, f, root, s, ts)
            cur = s
        lo_t, hi_t = accumulate_tau(start, size, parent, offsets, values, f, root, t, tt)
        bd, sq = evaluate_pair(ts, lo_s, hi_s, tt, lo_t, hi_t, n)
        out_bd[i] = bd
        out_sq[i] = sq
        clear(tt, lo_t, hi_t)
    clear(ts, lo_s, hi_s)


@njit(cache=True, nogil=True, inline="always")
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@njit(cache=True, nogil=True)
def min_degree_elimination(indptr, indices):
    """Minimum-degree elimination on a dense bitset copy of the filled graph.

    Returns ``(order, nb_ptr, nb_idx)``: the elimination order and, in CSR
    form, each eliminated vertex's filled neighbourhood at elimination time.
    """
    n = len(indptr) - 1
    words = (n + 63) // 64
    rows = np.zeros((n, words), dtype=np.uint64)
    deg = np.zeros(n, dtype=np.int64)
    for v in range(n):
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            rows[v, u >> 6] |= np.uint64(1) << np.uint64(u & 63)
        deg[v] = indptr[v + 1] - indptr[v]
    alive = np.ones(n, dtype=np.bool_)
    order = np.empty(n, dtype=np.int64)
    nb_ptr = np.zeros(n + 1, dtype=np.int64)
    cap = max(16, 4 * len(indices))
    nb_idx = np.empty(cap, dtype=np.int64)
    nb = np.empty(n, dtype=np.int64)
    for step in range(n):
        v = -1
        best = n + 1
        for u in range(n):
            if alive[u] and deg[u] < best:
                best = deg[u]
                v = u
        alive[v] = False
        order[step] = v
        cnt = 0
        for w in range(words):
            bits = rows[v, w]
            while bits != np.uint64(0):
                low = bits & (~bits + np.uint64(1))
                b = np.int64(_popcount(low - np.uint64(1)))
                nb[cnt] = w * 64 + b
                cnt += 1
                bits ^= low
        base = nb_ptr[step]
        if base + cnt > cap:
            while base + cnt > cap:
                cap *= 2
            grown = np.empty(cap, dtype=np.int64)
            grown[:base] = nb_idx[:base]
            nb_idx = grown
        nb_idx[base:base + cnt] = nb[:cnt]
        nb_ptr[step + 1] = base + cnt
        vw = v >> 6
        vbit = np.uint64(1) << np.uint64(v & 63)
        for j in range(cnt):
            u = nb[j]
            uw = u >> 6
            ubit = np.uint64(1) << np.uint64(u & 63)
            c = 0
            for w in range(words):
                x = rows[u, w] | rows[v, w]
                if w == uw:
                    x &= ~ubit
                if w == vw:
                    x &= ~vbit
                rows[u, w] = x
                c += np.int64(_popcount(x))
            deg[u] = c
        for w in range(words):
            rows[v, w] = np.uint64(0)
    return order, nb_ptr, nb_idx[:nb_ptr[n]]
