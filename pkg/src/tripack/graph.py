"""Graph state for the random greedy triangle-removal process.

The graph starts as K_n and only ever loses edges. Alongside the adjacency
we keep every pairwise co-degree Y(u, v) (number of common neighbours) and
a two-level prefix-sum index over the canonical edge slots, where slot
(u, v) weighs Y(u, v) while the edge is present and 0 afterwards. The index
total is 3Q, which is what makes exact uniform triangle sampling cheap:
pick an edge with probability Y_e / 3Q, then one of its Y_e common
neighbours uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from . import _kernels as K
from .rng import RandomWords

MAX_VERTICES = 1 << 15  # co-degree bookkeeping is int16
K_MIN_WORDS = 64


class ProcessTerminated(Exception):
    """Raised when a triangle is requested from a triangle-free graph."""


class InvalidTriangle(ValueError):
    """Raised when asked to remove a triple that is not a triangle of the graph."""


@dataclass(frozen=True, order=True)
class Triangle:
    a: int
    b: int
    c: int

    def __post_init__(self):
        if not (0 <= self.a < self.b < self.c):
            raise ValueError(f"triangle vertices must satisfy 0 <= a < b < c, got {self}")

    @classmethod
    def of(cls, x: int, y: int, z: int) -> "Triangle":
        a, b, c = sorted((int(x), int(y), int(z)))
        return cls(a, b, c)

    def edges(self) -> tuple[tuple[int, int], ...]:
        return ((self.a, self.b), (self.b, self.c), (self.a, self.c))


@dataclass(frozen=True)
class RemovalReceipt:
    """Co-degrees of the removed triangle's edges, measured just before removal."""

    triangle: Triangle
    y_ab: int
    y_bc: int
    y_ac: int
    dq: int


@dataclass(eq=False)
class GraphState:
    """Mutable graph plus co-degree ledger and sampler index.

    Co-degrees are not stored as a symmetric table. ``lost[u, w]`` counts
    the common neighbours of u and w that disappeared because an edge at u
    was deleted, so ``Y(u, w) = n - 2 - lost[u, w] - lost[w, u]``. Deleting
    edge uv then only touches rows u and v of ``lost``, which keeps the hot
    update path contiguous in memory.
    """

    n: int
    bits: np.ndarray
    adj: np.ndarray
    lost: np.ndarray
    rowsum: np.ndarray
    blocksum: np.ndarray
    scal: np.ndarray

    @property
    def q(self) -> int:
        return int(self.scal[0])

    @property
    def i(self) -> int:
        return int(self.scal[1])

    @property
    def edge_count(self) -> int:
        """|E(i)| from the step counter; see :func:`count_edges` for a recount."""
        return comb(self.n, 2) - 3 * self.i

    @property
    def weight_total(self) -> int:
        return int(self.blocksum.sum())

    def copy(self) -> "GraphState":
        return GraphState(
            self.n,
            self.bits.copy(),
            self.adj.copy(),
            self.lost.copy(),
            self.rowsum.copy(),
            self.blocksum.copy(),
            self.scal.copy(),
        )

    def has_edge(self, u: int, v: int) -> bool:
        return u != v and bool(self.adj[u, v])

    def arrays(self):
        return self.bits, self.adj, self.lost, self.rowsum, self.blocksum, self.scal

    def fingerprint(self) -> tuple:
        """Hashable snapshot of the full state, for equality checks in tests."""
        return (self.n,) + tuple(a.tobytes() for a in self.arrays())


def init_complete(n: int) -> GraphState:
    """The complete graph K_n with all co-degrees n - 2 and Q = C(n, 3)."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if n > MAX_VERTICES:
        raise ValueError(f"n must be at most {MAX_VERTICES}, got {n}")
    n = int(n)
    words = (n + 63) >> 6
    bits = np.zeros((n, words), dtype=np.uint64)
    full, rest = divmod(n, 64)
    bits[:, :full] = np.uint64(0xFFFFFFFFFFFFFFFF)
    if rest:
        bits[:, full] = np.uint64((1 << rest) - 1)
    idx = np.arange(n)
    bits[idx, idx >> 6] &= ~(np.uint64(1) << (idx & 63).astype(np.uint64))

    adj = np.ones((n, n), dtype=np.uint8)
    np.fill_diagonal(adj, 0)
    lost = np.zeros((n, n), dtype=np.int16)

    rowsum = np.arange(n - 1, -1, -1, dtype=np.int64) * max(n - 2, 0)
    blocks = (n + (1 << K.ROW_BLOCK_SHIFT) - 1) >> K.ROW_BLOCK_SHIFT
    blocksum = np.add.reduceat(rowsum, np.arange(0, n, 1 << K.ROW_BLOCK_SHIFT))
    assert blocksum.shape == (blocks,)
    scal = np.array([comb(n, 3), 0], dtype=np.int64)
    return GraphState(n, bits, adj, lost, rowsum, blocksum.astype(np.int64), scal)


def codegree(state: GraphState, u: int, v: int) -> int:
    """Y(u, v): number of common neighbours of u and v (edge or not)."""
    n = state.n
    if u == v:
        raise ValueError("codegree is defined for distinct vertices only")
    if not (0 <= u < n and 0 <= v < n):
        raise ValueError(f"vertices must lie in [0, {n}), got ({u}, {v})")
    return n - 2 - int(state.lost[u, v]) - int(state.lost[v, u])


def codegree_matrix(state: GraphState) -> np.ndarray:
    """Full symmetric co-degree table (int32) with a zero diagonal."""
    n = state.n
    lost = state.lost.astype(np.int32)
    y = (n - 2) - lost - lost.T
    np.fill_diagonal(y, 0)
    return y


def recount_codegrees(state: GraphState) -> np.ndarray:
    """Co-degrees recomputed from the bit-rows by AND + popcount."""
    n = state.n
    y = np.zeros((n, n), dtype=np.int32)
    for u in range(n):
        y[u] = np.bitwise_count(state.bits[u] & state.bits).sum(axis=1)
    np.fill_diagonal(y, 0)
    return y


def count_edges(state: GraphState) -> int:
    """Edge count recomputed from the bit-rows."""
    return int(np.bitwise_count(state.bits).sum()) // 2


def sum_edge_codegrees(state: GraphState) -> int:
    """Sum of Y over present edges, read from adjacency; equals 3Q."""
    s1, _ = K.edge_codegree_sums(state.adj, state.lost, state.n)
    return int(s1)


def expected_delta_q(state: GraphState, exact: bool = False):
    """E[Q(i+1) - Q(i) | G(i)] = 2 - (1/Q) * sum over edges of Y_e^2.

    Returns a float, or a ``Fraction`` when ``exact`` is set.
    """
    q = state.q
    if q == 0:
        raise ProcessTerminated("graph is triangle-free")
    _, s2 = K.edge_codegree_sums(state.adj, state.lost, state.n)
    value = Fraction(2 * q - int(s2), q)
    return value if exact else float(value)


def _with_words(rand: RandomWords, fn, *args):
    """Call a kernel that reads words at ``rand.pos``; refill and retry if dry."""
    rand.reserve()
    while True:
        result = fn(*args, rand.buffer, rand.pos)
        if result[-1] >= 0:
            rand.pos = int(result[-1])
            return result
        rand.reserve(2 * len(rand.buffer) + K_MIN_WORDS)


def sample_uniform_triangle(state: GraphState, rand: RandomWords) -> Triangle:
    """Uniformly random triangle of the current graph; the state is not touched."""
    if state.q == 0:
        raise ProcessTerminated("graph is triangle-free")
    a, b, c, _ = _with_words(
        rand, K.sample, state.bits, state.lost, state.rowsum, state.blocksum, state.scal, state.n
    )
    return Triangle(int(a), int(b), int(c))


def sample_triangles(state: GraphState, rand: RandomWords, size: int) -> np.ndarray:
    """``size`` independent uniform triangle draws as an int64 array (size, 3)."""
    if state.q == 0:
        raise ProcessTerminated("graph is triangle-free")
    out = np.empty((size, 3), dtype=np.int64)
    filled = 0
    while filled < size:
        rand.reserve()
        got, pos = K.sample_many(
            state.bits, state.lost, state.rowsum, state.blocksum, state.scal, state.n,
            rand.buffer, rand.pos, out[filled:],
        )
        rand.pos = int(pos)
        filled += int(got)
        if filled < size:
            rand.reserve(len(rand.buffer) - rand.pos + K_MIN_WORDS)
    return out


def remove_triangle(state: GraphState, tri: Triangle) -> RemovalReceipt:
    """Delete the three edges of ``tri``; validates before mutating anything."""
    n = state.n
    if tri.c >= n:
        raise InvalidTriangle(f"{tri} has a vertex outside [0, {n})")
    for u, v in tri.edges():
        if not state.adj[u, v]:
            raise InvalidTriangle(f"edge ({u}, {v}) of {tri} is not present")
    y_ab, y_bc, y_ac = K.remove(*state.arrays(), n, tri.a, tri.b, tri.c)
    dq = -(int(y_ab) + int(y_bc) + int(y_ac) - 2)
    return RemovalReceipt(tri, int(y_ab), int(y_bc), int(y_ac), dq)


def edge_for_rank(state: GraphState, r: int) -> tuple[int, int]:
    """Edge whose slot on the weight line [0, 3Q) contains rank r."""
    if not 0 <= r < 3 * state.q:
        raise ValueError(f"rank must lie in [0, {3 * state.q}), got {r}")
    u, v, _ = K.select_edge(state.bits, state.lost, state.rowsum, state.blocksum, state.n, r)
    return int(u), int(v)


def common_neighbour_by_rank(state: GraphState, u: int, v: int, k: int) -> int:
    """k-th smallest common neighbour of u and v."""
    if not 0 <= k < codegree(state, u, v):
        raise ValueError(f"rank {k} out of range for pair ({u}, {v})")
    return int(K.kth_common_neighbour(state.bits, u, v, k))


def scan_codegrees(state: GraphState, previous: np.ndarray | None = None,
                   out: np.ndarray | None = None):
    """Min and max co-degree over all pairs, plus a monotonicity count.

    Fills the upper triangle of ``out`` (int16, n x n) with the current
    co-degrees and counts pairs whose co-degree exceeds ``previous``.
    Returns ``(out, min_y, max_y, increases)``; min/max are None when n < 2.
    """
    n = state.n
    if out is None:
        out = np.zeros((n, n), dtype=np.int16)
    prev = previous if previous is not None else np.zeros((0, 0), dtype=np.int16)
    lo, hi, increases = K.scan_pairs(state.lost, n, prev, out)
    if n < 2:
        return out, None, None, 0
    return out, int(lo), int(hi), int(increases)
