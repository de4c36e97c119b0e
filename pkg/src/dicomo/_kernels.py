"""Compiled BFS kernels over CSR adjacency.

The batch kernel runs up to 4096 simultaneous single-source BFS passes as a
bitset sweep: each vertex carries one 64-bit word per 64 sources, and a level
step ORs frontier words along edges. All kernels release the GIL so callers
can spread batches over threads.
"""

import numpy as np
from numba import njit

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_ZERO = np.uint64(0)
_ONE = np.uint64(1)

BATCH = 4096


@njit(cache=True, nogil=True, inline="always")
def _popcount64(x):
    x = x - ((x >> _ONE) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return (x * _H01) >> np.uint64(56)


@njit(cache=True, nogil=True, inline="always")
def _trailing_zeros(x):
    c = 0
    while x & _ONE == _ZERO:
        x >>= _ONE
        c += 1
    return c


@njit(cache=True, nogil=True)
def bfs_batch(indptr, nbrs, n, sources):
    """Bitset BFS from `sources`; returns (eccentricity max, finite pairs,
    best source, best target).

    finite pairs counts ordered pairs (s, v) with v != s reachable from s.
    The best pair attains the max distance with the smallest source, ties
    broken by smallest target; (-1, -1) when nothing is reachable.
    """
    S = sources.shape[0]
    nw = (S + 63) // 64
    visited = np.zeros((n, nw), dtype=np.uint64)
    frontier = np.zeros((n, nw), dtype=np.uint64)
    nxt = np.zeros((n, nw), dtype=np.uint64)
    for i in range(S):
        v = sources[i]
        bit = _ONE << np.uint64(i & 63)
        visited[v, i >> 6] |= bit
        frontier[v, i >> 6] |= bit
    finite = 0
    level = 0
    while True:
        for v in range(n):
            for w in range(nw):
                nxt[v, w] = _ZERO
        for u in range(n):
            empty = True
            for w in range(nw):
                if frontier[u, w] != _ZERO:
                    empty = False
                    break
            if empty:
                continue
            for e in range(indptr[u], indptr[u + 1]):
                v = nbrs[e]
                for w in range(nw):
                    nxt[v, w] |= frontier[u, w]
        new_count = 0
        for v in range(n):
            for w in range(nw):
                nb = nxt[v, w] & ~visited[v, w]
                nxt[v, w] = nb
                if nb != _ZERO:
                    visited[v, w] |= nb
                    new_count += int(_popcount64(nb))
        if new_count == 0:
            break
        level += 1
        finite += new_count
        tmp = frontier
        frontier = nxt
        nxt = tmp
    best_s = np.int64(-1)
    best_t = np.int64(-1)
    if level > 0:
        # `frontier` still holds the last level that added new pairs
        for v in range(n):
            for w in range(nw):
                bits = frontier[v, w]
                while bits != _ZERO:
                    low = bits & (~bits + _ONE)
                    i = (w << 6) + _trailing_zeros(low)
                    s = sources[i]
                    if best_s < 0 or s < best_s:
                        best_s = s
                        best_t = v
                    bits ^= low
    return level, finite, best_s, best_t


@njit(cache=True, nogil=True)
def bfs_single(indptr, nbrs, n, source):
    """Hop distances from `source`; -1 for unreachable vertices."""
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    dist[source] = 0
    queue[0] = source
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        for e in range(indptr[u], indptr[u + 1]):
            v = nbrs[e]
            if dist[v] < 0:
                dist[v] = du + 1
                queue[tail] = v
                tail += 1
    return dist


@njit(cache=True, nogil=True)
def bfs_pair(indptr, nbrs, n, source, target):
    """dist(source, target), or -1; stops as soon as the target is settled."""
    if source == target:
        return 0
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    dist[source] = 0
    queue[0] = source
    head = 0
    tail = 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        for e in range(indptr[u], indptr[u + 1]):
            v = nbrs[e]
            if dist[v] < 0:
                if v == target:
                    return du + 1
                dist[v] = du + 1
                queue[tail] = v
                tail += 1
    return -1
