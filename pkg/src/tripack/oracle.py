"""Brute-force reference for the removal process, and chi-square tests.

Everything here works from an explicit adjacency matrix and re-enumerates
triangles from scratch, so it shares no bookkeeping with the fast engine.
Chi-square quantiles come from ``scipy.stats.chi2.ppf`` (regularized
incomplete gamma inversion).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import stats

from .graph import GraphState, Triangle, codegree, common_neighbour_by_rank, edge_for_rank
from .process import VIOLATION_KEYS, RunRecord, default_stride
from .rng import RandomWords
from .trajectory import (DEFAULT_PARAMS, TrajectoryParams, TrajectorySnapshot, Verdict,
                         envelope_check, horizon_i0)

NAIVE_CAP = 64
UNIFORMITY_QUANTILE = 0.999
TWO_SAMPLE_QUANTILE = 0.99
MIN_EXPECTED = 5


def adjacency_of(state: GraphState) -> np.ndarray:
    return state.adj.astype(bool)


def enumerate_triangles(adjacency) -> list[Triangle]:
    """All triangles a < b < c of a symmetric 0/1 adjacency matrix, sorted."""
    adj = np.asarray(adjacency, dtype=bool)
    n = adj.shape[0]
    nbrs = [set(np.flatnonzero(adj[u]).tolist()) for u in range(n)]
    out = []
    for a in range(n):
        for b in sorted(x for x in nbrs[a] if x > a):
            for c in sorted(x for x in nbrs[a] & nbrs[b] if x > b):
                out.append(Triangle(a, b, c))
    return out


def count_triangles(adjacency) -> int:
    """Triangle count as trace(A^3) / 6."""
    a = np.asarray(adjacency, dtype=np.float64)
    return int(round(np.einsum("ij,ji->", a @ a, a))) // 6


def exhaustive_mean_delta_q(adjacency) -> Fraction:
    """Exact mean change in triangle count over removal of every current triangle."""
    adj = np.array(adjacency, dtype=bool)
    tris = enumerate_triangles(adj)
    if not tris:
        raise ValueError("graph is triangle-free")
    q = len(tris)
    total = 0
    for t in tris:
        trial = adj.copy()
        for u, v in t.edges():
            trial[u, v] = trial[v, u] = False
        total += count_triangles(trial) - q
    return Fraction(total, q)


def sampler_rank_counts(state: GraphState):
    """Walk every rank of the sampler's two draws and tally where it lands.

    Returns a dict triangle -> exact probability (as Fraction) of that
    triangle under the two-stage mechanism, obtained by enumerating every
    rank r in [0, 3Q) of the edge draw and every rank k in [0, Y_e) of the
    neighbour draw.
    """
    q = state.q
    probs: dict[Triangle, Fraction] = {}
    hits: dict[tuple[int, int], int] = {}
    for r in range(3 * q):
        e = edge_for_rank(state, r)
        hits[e] = hits.get(e, 0) + 1
    for (u, v), count in hits.items():
        y = codegree(state, u, v)
        for k in range(y):
            x = common_neighbour_by_rank(state, u, v, k)
            t = Triangle.of(u, v, x)
            probs[t] = probs.get(t, Fraction(0)) + Fraction(count, 3 * q) * Fraction(1, y)
    return probs, hits


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    threshold: float
    passed: bool


def chi_square_uniformity(observed_counts: Sequence[int], expected_count: float,
                          quantile: float = UNIFORMITY_QUANTILE) -> ChiSquareResult:
    """Pearson goodness-of-fit of counts against a flat expectation."""
    obs = np.asarray(observed_counts, dtype=np.float64)
    if obs.size < 2:
        raise ValueError("need at least two cells")
    if expected_count < MIN_EXPECTED:
        raise ValueError(f"expected count {expected_count} per cell is below {MIN_EXPECTED}")
    statistic = float(((obs - expected_count) ** 2).sum() / expected_count)
    dof = obs.size - 1
    threshold = float(stats.chi2.ppf(quantile, dof))
    return ChiSquareResult(statistic, dof, threshold, statistic < threshold)


def two_sample_chi_square(sample_a: Sequence[int], sample_b: Sequence[int],
                          quantile: float = TWO_SAMPLE_QUANTILE) -> ChiSquareResult:
    """Homogeneity test of two samples of integer outcomes.

    Outcomes are sorted and adjacent ones pooled until every cell expects at
    least five observations in both samples.
    """
    a = np.asarray(sample_a)
    b = np.asarray(sample_b)
    support = np.union1d(a, b)
    ca = np.array([np.count_nonzero(a == s) for s in support], dtype=np.float64)
    cb = np.array([np.count_nonzero(b == s) for s in support], dtype=np.float64)
    na, nb = ca.sum(), cb.sum()
    frac_a, frac_b = na / (na + nb), nb / (na + nb)

    cells_a, cells_b = [], []
    acc_a = acc_b = 0.0
    for x, y in zip(ca, cb):
        acc_a += x
        acc_b += y
        col = acc_a + acc_b
        if col * frac_a >= MIN_EXPECTED and col * frac_b >= MIN_EXPECTED:
            cells_a.append(acc_a)
            cells_b.append(acc_b)
            acc_a = acc_b = 0.0
    if acc_a or acc_b:
        if cells_a:
            cells_a[-1] += acc_a
            cells_b[-1] += acc_b
        else:
            cells_a.append(acc_a)
            cells_b.append(acc_b)

    dof = len(cells_a) - 1
    if dof == 0:
        return ChiSquareResult(0.0, 0, 0.0, True)
    oa, ob = np.array(cells_a), np.array(cells_b)
    col = oa + ob
    ea, eb = col * frac_a, col * frac_b
    statistic = float(((oa - ea) ** 2 / ea).sum() + ((ob - eb) ** 2 / eb).sum())
    threshold = float(stats.chi2.ppf(quantile, dof))
    return ChiSquareResult(statistic, dof, threshold, statistic < threshold)


def _snapshot_from_adjacency(adj: np.ndarray, i: int, params: TrajectoryParams, i0: int,
                             previous: np.ndarray | None):
    n = adj.shape[0]
    a = adj.astype(np.int64)
    y = a @ a
    edges = int(a.sum()) // 2
    q = int(np.einsum("ij,ji->", y, a)) // 6
    increases = 0
    if n >= 2:
        upper = y[np.triu_indices(n, 1)]
        lo, hi = int(upper.min()), int(upper.max())
        if previous is not None:
            increases = int(np.count_nonzero(upper > previous))
    else:
        upper, lo, hi = None, None, None
    bare = TrajectorySnapshot(n, i, q, edges, lo, hi)
    snap = TrajectorySnapshot(n, i, q, edges, lo, hi, envelope_check(bare, n, params, i0))
    return snap, upper, increases


def naive_run(n: int, seed: int, checkpoint_stride: int | None = None,
              envelope_params: TrajectoryParams = DEFAULT_PARAMS,
              cap: int = NAIVE_CAP) -> RunRecord:
    """The removal process by explicit enumeration, one step at a time."""
    if not 1 <= n <= cap:
        raise ValueError(f"naive_run supports 1 <= n <= {cap}, got {n}")
    start = time.perf_counter()
    stride = default_stride(n) if checkpoint_stride is None else int(checkpoint_stride)
    rand = RandomWords(seed)
    adj = ~np.eye(n, dtype=bool)
    i0 = horizon_i0(n, envelope_params) if n >= 2 else 0
    snapshots = []
    violations = dict.fromkeys(VIOLATION_KEYS, 0)
    previous = None

    def checkpoint(i):
        nonlocal previous
        snap, previous, increases = _snapshot_from_adjacency(adj, i, envelope_params, i0, previous)
        v = snap.verdicts
        violations["q_lower"] += v.q_lower_ok is Verdict.VIOLATED
        violations["q_upper"] += v.q_upper_ok is Verdict.VIOLATED
        violations["y"] += v.y_ok is Verdict.VIOLATED
        violations["y_monotone"] += increases
        snapshots.append(snap)

    i = 0
    checkpoint(0)
    while True:
        tris = enumerate_triangles(adj)
        if not tris:
            break
        t = tris[rand.bounded(len(tris))]
        for u, v in t.edges():
            adj[u, v] = adj[v, u] = False
        i += 1
        if i % stride == 0:
            checkpoint(i)
    if snapshots[-1].i != i:
        checkpoint(i)

    return RunRecord(
        n=n,
        seed=int(seed),
        M=i,
        final_edges=int(adj.sum()) // 2,
        snapshots=snapshots,
        envelope_violations=violations,
        max_residual_bound=max(s.residual for s in snapshots),
        checkpoint_stride=stride,
        wall_time=time.perf_counter() - start,
    )
