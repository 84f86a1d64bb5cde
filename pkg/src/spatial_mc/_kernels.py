# Compiled inner loops. Arrays are flat in Fortran order (axis 0 fastest).
import heapq
import os

import numba as nb
import numpy as np

if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
    nb.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

INF = np.inf


@nb.njit(cache=True)
def _strides(dims):
    st = np.empty(dims.size, np.int64)
    acc = 1
    for i in range(dims.size):
        st[i] = acc
        acc *= dims[i]
    return st


@nb.njit(cache=True)
def _decode(idx, dims, coord):
    for i in range(dims.size):
        coord[i] = idx % dims[i]
        idx //= dims[i]


@nb.njit(cache=True)
def _pred(idx, k, dims, strides, coord, offsets):
    """Index of the point v with an arc v -> idx along offset k, or -1 if out of bounds."""
    v = idx
    for i in range(dims.size):
        c = coord[i] - offsets[k, i]
        if c < 0 or c >= dims[i]:
            return -1
        v -= offsets[k, i] * strides[i]
    return v


@nb.njit(cache=True)
def dijkstra(source, dims, offsets, weights):
    """Multi-source shortest-path distance to ``source`` along the arcs.

    Relaxation walks arcs backwards, so ``dist[x]`` is the length of the
    shortest path from ``x`` into the source set.
    """
    n = source.size
    dist = np.full(n, INF)
    done = np.zeros(n, np.bool_)
    strides = _strides(dims)
    coord = np.empty(dims.size, np.int64)
    heap = [(0.0, np.int64(0))]
    heap.pop()
    for i in range(n):
        if source[i]:
            dist[i] = 0.0
            heap.append((0.0, np.int64(i)))
    while len(heap) > 0:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        _decode(u, dims, coord)
        for k in range(offsets.shape[0]):
            v = _pred(u, k, dims, strides, coord, offsets)
            if v < 0 or done[v]:
                continue
            nd = d + weights[k]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


@nb.njit(cache=True)
def flood_back(seed, passable, dims, offsets):
    """Points reachable from ``seed`` by walking arcs backwards through ``passable``."""
    n = seed.size
    reached = np.zeros(n, np.bool_)
    queue = np.empty(n, np.int64)
    head = 0
    tail = 0
    strides = _strides(dims)
    coord = np.empty(dims.size, np.int64)
    for i in range(n):
        if seed[i]:
            reached[i] = True
            queue[tail] = i
            tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        _decode(u, dims, coord)
        for k in range(offsets.shape[0]):
            v = _pred(u, k, dims, strides, coord, offsets)
            if v >= 0 and passable[v] and not reached[v]:
                reached[v] = True
                queue[tail] = v
                tail += 1
    return reached


@nb.njit(cache=True)
def _envelope_line(f, w, out, v, z):
    # lower envelope of parabolas (x - x_q)^2 + f[q], positions x_q = q * w
    n = f.size
    k = -1
    for q in range(n):
        if f[q] == INF:
            continue
        xq = q * w
        if k < 0:
            k = 0
            v[0] = q
            z[0] = -INF
            z[1] = INF
            continue
        while True:
            xp = v[k] * w
            s = ((f[q] + xq * xq) - (f[v[k]] + xp * xp)) / (2.0 * (xq - xp))
            if s <= z[k]:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = INF
    if k < 0:
        for p in range(n):
            out[p] = INF
        return
    j = 0
    for p in range(n):
        xp = p * w
        while z[j + 1] < xp:
            j += 1
        d = xp - v[j] * w
        out[p] = d * d + f[v[j]]


@nb.njit(cache=True, parallel=True)
def envelope_rows(rows, w):
    """Squared Euclidean transform along the last axis of a 2D array of lines."""
    m, n = rows.shape
    out = np.empty_like(rows)
    for r in nb.prange(m):
        v = np.empty(n, np.int64)
        z = np.empty(n + 1, np.float64)
        _envelope_line(rows[r], w, out[r], v, z)
    return out


@nb.njit(cache=True, parallel=True)
def minplus_rows(rows, use_max):
    """Per line: g(x) = min_q combine(|x - q|, f(q)), combine being + or max."""
    m, n = rows.shape
    out = np.empty_like(rows)
    for r in nb.prange(m):
        for x in range(n):
            best = INF
            for q in range(n):
                fq = rows[r, q]
                if fq == INF:
                    continue
                dx = float(abs(x - q))
                c = max(dx, fq) if use_max else dx + fq
                if c < best:
                    best = c
            out[r, x] = best
    return out
