"""Compiled inner loops for the triangle-removal engine.

Array layout shared by every kernel (see ``graph.GraphState``):

* ``bits``     uint64[n, W]  adjacency bit-rows, W = ceil(n / 64)
* ``adj``      uint8[n, n]   the same adjacency, dense, for vectorised row ops
* ``lost``     int16[n, n]   lost[u, w] = common neighbours of u and w removed
                             by deleting an edge at u; Y(u, w) = n - 2 - lost[u, w] - lost[w, u]
* ``rowsum``   int64[n]      sum of Y over present edges (u, v), v > u, in row u
* ``blocksum`` int64[B]      sum of ``rowsum`` over each run of 64 rows
* ``scal``     int64[2]      (Q, i)

Random draws read from a uint64 word buffer. A function that runs out of
words returns position -1 and leaves the graph untouched, so the caller can
refill and retry the same step from the same word.
"""

import numpy as np
from numba import njit

ROW_BLOCK_SHIFT = 6

_ONE = np.uint64(1)
_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


@njit(cache=True, inline="always")
def popcount(x):
    x = x - ((x >> np.uint64(1)) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return np.int64((x * _H01) >> np.uint64(56))


@njit(cache=True, inline="always")
def lowest_bit_index(x):
    low = x & (~x + _ONE)
    return popcount(low - _ONE)


@njit(cache=True, inline="always")
def codegree(lost, n, u, v):
    return np.int64(n - 2) - np.int64(lost[u, v]) - np.int64(lost[v, u])


@njit(cache=True)
def bounded(buf, pos, bound):
    """Uniform draw in [0, bound) by masked rejection; returns (value, new_pos)."""
    m = np.uint64(bound - 1)
    m |= m >> np.uint64(1)
    m |= m >> np.uint64(2)
    m |= m >> np.uint64(4)
    m |= m >> np.uint64(8)
    m |= m >> np.uint64(16)
    m |= m >> np.uint64(32)
    ub = np.uint64(bound)
    while pos < buf.shape[0]:
        x = buf[pos] & m
        pos += 1
        if x < ub:
            return np.int64(x), pos
    return np.int64(-1), np.int64(-1)


@njit(cache=True)
def has_edge(bits, u, v):
    return (bits[u, v >> 6] >> np.uint64(v & 63)) & _ONE == _ONE


@njit(cache=True)
def select_edge(bits, lost, rowsum, blocksum, n, r):
    """Present edge (u, v), u < v, owning rank r of the weight line [0, 3Q).

    Edge slots are laid out row-major over pairs u < v and slot (u, v) has
    width Y(u, v); returns (u, v, offset of r inside the slot).
    """
    blk = 0
    while r >= blocksum[blk]:
        r -= blocksum[blk]
        blk += 1
    u = blk << ROW_BLOCK_SHIFT
    while r >= rowsum[u]:
        r -= rowsum[u]
        u += 1
    start = u + 1
    k0 = start >> 6
    for k in range(k0, bits.shape[1]):
        x = bits[u, k]
        if k == k0:
            x &= ~((_ONE << np.uint64(start & 63)) - _ONE)
        while x:
            v = (k << 6) + lowest_bit_index(x)
            x &= x - _ONE
            y = codegree(lost, n, u, v)
            if r < y:
                return u, v, r
            r -= y
    return -1, -1, -1


@njit(cache=True)
def kth_common_neighbour(bits, u, v, k):
    """The k-th (0-based, increasing order) common neighbour of u and v."""
    for w in range(bits.shape[1]):
        x = bits[u, w] & bits[v, w]
        c = popcount(x)
        if k < c:
            for _ in range(k):
                x &= x - _ONE
            return (w << 6) + lowest_bit_index(x)
        k -= c
    return -1


@njit(cache=True)
def sample(bits, lost, rowsum, blocksum, scal, n, buf, pos):
    """Draw a uniform triangle; returns (a, b, c, new_pos) with a < b < c."""
    total = 3 * scal[0]
    r, pos = bounded(buf, pos, total)
    if pos < 0:
        return -1, -1, -1, np.int64(-1)
    u, v, _ = select_edge(bits, lost, rowsum, blocksum, n, r)
    k, pos = bounded(buf, pos, codegree(lost, n, u, v))
    if pos < 0:
        return -1, -1, -1, np.int64(-1)
    x = kth_common_neighbour(bits, u, v, k)
    if x < u:
        return x, u, v, pos
    if x < v:
        return u, x, v, pos
    return u, v, x, pos


@njit(cache=True)
def sample_many(bits, lost, rowsum, blocksum, scal, n, buf, pos, out):
    """Fill out[k] with independent triangle draws until out or buf is exhausted.

    Returns (number filled, new_pos).
    """
    for j in range(out.shape[0]):
        a, b, c, nxt = sample(bits, lost, rowsum, blocksum, scal, n, buf, pos)
        if nxt < 0:
            return j, pos
        out[j, 0] = a
        out[j, 1] = b
        out[j, 2] = c
        pos = nxt
    return out.shape[0], pos


@njit(cache=True)
def delete_edge(bits, adj, lost, rowsum, blocksum, n, a, b):
    y = codegree(lost, n, a, b)
    r = min(a, b)
    rowsum[r] -= y
    blocksum[r >> ROW_BLOCK_SHIFT] -= y
    bits[a, b >> 6] &= ~(_ONE << np.uint64(b & 63))
    bits[b, a >> 6] &= ~(_ONE << np.uint64(a & 63))
    adj[a, b] = 0
    adj[b, a] = 0
    # each common neighbour w keeps edges aw, bw, and each of them loses one
    # common neighbour (b, resp. a)
    for k in range(bits.shape[1]):
        x = bits[a, k] & bits[b, k]
        while x:
            w = (k << 6) + lowest_bit_index(x)
            x &= x - _ONE
            r = min(a, w)
            rowsum[r] -= 1
            blocksum[r >> ROW_BLOCK_SHIFT] -= 1
            r = min(b, w)
            rowsum[r] -= 1
            blocksum[r >> ROW_BLOCK_SHIFT] -= 1
    for j in range(n):
        lost[a, j] += adj[b, j]
    for j in range(n):
        lost[b, j] += adj[a, j]


@njit(cache=True)
def remove(bits, adj, lost, rowsum, blocksum, scal, n, a, b, c):
    """Delete the edges of triangle abc; returns pre-removal (y_ab, y_bc, y_ac)."""
    y_ab = codegree(lost, n, a, b)
    y_bc = codegree(lost, n, b, c)
    y_ac = codegree(lost, n, a, c)
    delete_edge(bits, adj, lost, rowsum, blocksum, n, a, b)
    delete_edge(bits, adj, lost, rowsum, blocksum, n, b, c)
    delete_edge(bits, adj, lost, rowsum, blocksum, n, a, c)
    scal[0] -= y_ab + y_bc + y_ac - 2
    scal[1] += 1
    return y_ab, y_bc, y_ac


@njit(cache=True)
def advance(bits, adj, lost, rowsum, blocksum, scal, n, buf, pos, stop_i):
    """Run steps until i == stop_i, Q == 0, or the word buffer runs dry.

    Returns the buffer position; on a dry buffer this is the position at
    which the unfinished step started.
    """
    while scal[0] > 0 and scal[1] < stop_i:
        a, b, c, nxt = sample(bits, lost, rowsum, blocksum, scal, n, buf, pos)
        if nxt < 0:
            return pos
        remove(bits, adj, lost, rowsum, blocksum, scal, n, a, b, c)
        pos = nxt
    return pos


@njit(cache=True)
def scan_pairs(lost, n, previous, out):
    """Co-degree extremes over all pairs u < v.

    Writes Y into the upper triangle of ``out`` and counts pairs whose Y
    exceeds the matching entry of ``previous`` (skipped when ``previous`` is
    empty). Returns (min_y, max_y, increases).
    """
    lo = np.int64(n)
    hi = np.int64(-1)
    increases = 0
    check = previous.shape[0] == n
    for u in range(n):
        for v in range(u + 1, n):
            y = codegree(lost, n, u, v)
            if y < lo:
                lo = y
            if y > hi:
                hi = y
            if check and y > previous[u, v]:
                increases += 1
            out[u, v] = y
    return lo, hi, increases


@njit(cache=True)
def edge_codegree_sums(adj, lost, n):
    """(sum of Y, sum of Y^2) over present edges, read straight from adjacency."""
    s1 = np.int64(0)
    s2 = np.int64(0)
    for u in range(n):
        for v in range(u + 1, n):
            if adj[u, v]:
                y = codegree(lost, n, u, v)
                s1 += y
                s2 += y * y
    return s1, s2
