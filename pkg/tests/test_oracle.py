from itertools import combinations
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from tripack.graph import Triangle, init_complete, remove_triangle
from tripack.oracle import (chi_square_uniformity, count_triangles, enumerate_triangles,
                            naive_run, two_sample_chi_square)
from tripack.process import run, step
from tripack.rng import RandomWords


def complete(n):
    return ~np.eye(n, dtype=bool)


def test_enumerate_k4():
    assert enumerate_triangles(complete(4)) == [Triangle(*t) for t in combinations(range(4), 3)]


def test_enumerate_k5_minus_triangle():
    adj = complete(5)
    for u, v in Triangle(0, 1, 2).edges():
        adj[u, v] = adj[v, u] = False
    assert enumerate_triangles(adj) == [Triangle(0, 3, 4), Triangle(1, 3, 4), Triangle(2, 3, 4)]


def test_enumerate_triangle_free():
    # the 5-cycle and a complete bipartite graph
    c5 = np.zeros((5, 5), dtype=bool)
    for k in range(5):
        c5[k, (k + 1) % 5] = c5[(k + 1) % 5, k] = True
    k33 = np.zeros((6, 6), dtype=bool)
    k33[:3, 3:] = k33[3:, :3] = True
    assert enumerate_triangles(c5) == []
    assert enumerate_triangles(k33) == []


@pytest.mark.parametrize("n", range(1, 31))
def test_enumerate_complete_graph_count(n):
    assert len(enumerate_triangles(complete(n))) == comb(n, 3)


@given(st.integers(3, 12), st.integers(0, 2**32))
def test_oracle_counts_track_engine_on_replay(n, seed):
    state = init_complete(n)
    rand = RandomWords(seed)
    while state.q:
        step(state, rand)
        tris = enumerate_triangles(state.adj)
        assert len(tris) == state.q == count_triangles(state.adj)
        assert tris == sorted(set(tris))


@pytest.mark.parametrize("n, M, final", [(3, 1, 0), (4, 1, 3), (5, 2, 4)])
@pytest.mark.parametrize("seed", range(5))
def test_naive_run_agrees_with_engine_on_forced_cases(n, M, final, seed):
    slow, fast = naive_run(n, seed), run(n, seed)
    assert (slow.M, slow.final_edges) == (fast.M, fast.final_edges) == (M, final)


def test_naive_run_record_schema_matches_engine():
    slow, fast = naive_run(10, 3), run(10, 3)
    assert slow.to_dict().keys() == fast.to_dict().keys()
    assert slow.snapshots[0] == fast.snapshots[0]
    assert slow.final_edges == comb(10, 2) - 3 * slow.M
    assert slow.envelope_violations["y_monotone"] == 0


def test_naive_run_cap():
    with pytest.raises(ValueError):
        naive_run(65, 0)
    with pytest.raises(ValueError):
        naive_run(20, 0, cap=10)


def test_chi_square_perfect_fit():
    res = chi_square_uniformity([10] * 7, 10)
    assert res.statistic == 0 and res.dof == 6 and res.passed


@pytest.mark.parametrize("N", [5, 6, 50])
def test_chi_square_all_mass_in_one_cell(N):
    res = chi_square_uniformity([2 * N, 0], N, quantile=0.99)
    assert res.statistic == 2 * N
    assert not res.passed
    # the stricter default quantile only rejects from 2N > 10.83 on
    assert chi_square_uniformity([2 * N, 0], N).passed == bool(2 * N < stats.chi2.ppf(0.999, 1))


def test_chi_square_rejects_undersampled_cells():
    with pytest.raises(ValueError):
        chi_square_uniformity([4, 4, 4], 4)


def test_chi_square_threshold_is_the_quantile():
    res = chi_square_uniformity([100] * 120, 100)
    assert res.threshold == pytest.approx(stats.chi2.ppf(0.999, 119))


def test_two_sample_identical_and_disjoint():
    same = two_sample_chi_square([1] * 50 + [2] * 50, [1] * 50 + [2] * 50)
    assert same.statistic == 0 and same.dof == 1 and same.passed
    apart = two_sample_chi_square([1] * 100, [2] * 100)
    assert not apart.passed
    assert apart.statistic == pytest.approx(200.0)


def test_two_sample_pools_rare_outcomes():
    a = [0] * 500 + [1] * 2 + [2] * 1
    b = [0] * 480 + [1] * 3 + [3] * 2
    res = two_sample_chi_square(a, b)
    assert res.dof == 0 and res.passed
    a = [0] * 300 + [1] * 300 + [7] * 3
    b = [0] * 310 + [1] * 290 + [8] * 2
    assert two_sample_chi_square(a, b).dof == 1


def test_two_sample_single_outcome():
    assert two_sample_chi_square([4] * 30, [4] * 40).passed


def test_two_sample_matches_scipy_contingency():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 4, 400)
    b = rng.integers(0, 4, 300)
    res = two_sample_chi_square(a, b)
    table = np.array([np.bincount(a, minlength=4), np.bincount(b, minlength=4)])
    ref = stats.chi2_contingency(table, correction=False)
    assert res.statistic == pytest.approx(ref.statistic)
    assert res.dof == ref.dof


def test_remove_matches_enumeration_difference():
    state = init_complete(8)
    remove_triangle(state, Triangle(1, 4, 6))
    before = len(enumerate_triangles(state.adj))
    receipt = remove_triangle(state, Triangle(0, 2, 3))
    assert len(enumerate_triangles(state.adj)) - before == receipt.dq
