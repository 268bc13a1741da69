from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tripack.graph import (InvalidTriangle, ProcessTerminated, Triangle, codegree,
                           codegree_matrix, common_neighbour_by_rank, count_edges,
                           edge_for_rank, expected_delta_q, init_complete, recount_codegrees,
                           remove_triangle, sample_triangles, sample_uniform_triangle,
                           scan_codegrees, sum_edge_codegrees)
from tripack.oracle import enumerate_triangles, exhaustive_mean_delta_q, sampler_rank_counts
from tripack.process import step
from tripack.rng import RandomWords


def walk(n, seed, steps):
    """State after up to ``steps`` random removals, stopping before Q hits 0."""
    state = init_complete(n)
    rand = RandomWords(seed)
    while state.i < steps and state.q > 0:
        trial = state.copy()
        step(trial, rand)
        if trial.q == 0:
            break
        state = trial
    return state


# -- init_complete ---------------------------------------------------------

@pytest.mark.parametrize("n, q, y, edges", [(5, 10, 3, 10), (3, 1, 1, 3), (2, 0, 0, 1)])
def test_init_complete_examples(n, q, y, edges):
    state = init_complete(n)
    assert state.q == q
    assert count_edges(state) == edges
    ys = {codegree(state, u, v) for u, v in combinations(range(n), 2)}
    assert ys == {y}


@pytest.mark.parametrize("n", [1, 4, 63, 64, 65, 130])
def test_init_complete_invariants(n):
    state = init_complete(n)
    assert state.i == 0
    assert state.q == comb(n, 3)
    assert state.weight_total == 3 * comb(n, 3)
    assert count_edges(state) == comb(n, 2)
    assert np.array_equal(codegree_matrix(state), recount_codegrees(state))


@pytest.mark.parametrize("bad", [0, -3, 2.5])
def test_init_complete_rejects(bad):
    with pytest.raises(ValueError):
        init_complete(bad)


# -- codegree --------------------------------------------------------------

def test_codegree_examples():
    assert codegree(init_complete(7), 0, 1) == 5
    assert codegree(init_complete(2), 0, 1) == 0
    k4 = init_complete(4)
    remove_triangle(k4, Triangle(0, 1, 2))
    # what is left is the star at 3: leaves share vertex 3, centre and leaf share nothing
    recount = recount_codegrees(k4)
    assert codegree(k4, 0, 3) == recount[0, 3] == 0
    assert codegree(k4, 0, 1) == recount[0, 1] == 1


def test_codegree_rejects_equal_vertices():
    with pytest.raises(ValueError):
        codegree(init_complete(4), 2, 2)


# -- sampling --------------------------------------------------------------

def test_sample_on_k3_is_the_triangle():
    state = init_complete(3)
    rand = RandomWords(5)
    assert {sample_uniform_triangle(state, rand) for _ in range(20)} == {Triangle(0, 1, 2)}


def test_sample_on_triangle_free_graph_raises():
    state = init_complete(3)
    remove_triangle(state, Triangle(0, 1, 2))
    with pytest.raises(ProcessTerminated):
        sample_uniform_triangle(state, RandomWords(0))
    with pytest.raises(ProcessTerminated):
        sample_triangles(state, RandomWords(0), 3)


@given(st.integers(3, 12), st.integers(0, 2**32), st.integers(0, 40))
def test_sampling_leaves_state_bit_identical(n, seed, steps):
    state = walk(n, seed, steps)
    before = state.fingerprint()
    rand = RandomWords(seed + 1)
    for _ in range(5):
        t = sample_uniform_triangle(state, rand)
        assert all(state.has_edge(u, v) for u, v in t.edges())
    sample_triangles(state, rand, 50)
    assert state.fingerprint() == before


@given(st.integers(3, 10), st.integers(0, 2**32), st.integers(0, 30))
def test_sampler_is_exactly_uniform(n, seed, steps):
    # walking every rank of both draws gives the exact law of the sampler
    state = walk(n, seed, steps)
    probs, hits = sampler_rank_counts(state)
    assert set(probs) == set(enumerate_triangles(state.adj))
    assert set(probs.values()) == {Fraction(1, state.q)}
    for (u, v), h in hits.items():
        assert h == codegree(state, u, v)


def test_sampler_rank_walk_covers_every_edge_slot():
    state = walk(9, 3, 4)
    edges = {(u, v) for u, v in combinations(range(9), 2)
             if state.has_edge(u, v) and codegree(state, u, v) > 0}
    seen = {edge_for_rank(state, r) for r in range(3 * state.q)}
    assert seen == edges
    with pytest.raises(ValueError):
        edge_for_rank(state, 3 * state.q)


def test_common_neighbour_by_rank_lists_intersection_in_order():
    state = walk(70, 1, 30)
    u, v = 3, 66
    expected = [x for x in range(70) if state.has_edge(u, x) and state.has_edge(v, x)]
    got = [common_neighbour_by_rank(state, u, v, k) for k in range(codegree(state, u, v))]
    assert got == expected


def test_sample_triangles_matches_repeated_single_draws():
    state = walk(12, 9, 5)
    batch = sample_triangles(state, RandomWords(4), 200)
    rand = RandomWords(4)
    single = [sample_uniform_triangle(state, rand) for _ in range(200)]
    assert [Triangle(*row) for row in batch.tolist()] == single


# -- remove_triangle -------------------------------------------------------

def test_remove_from_k4():
    state = init_complete(4)
    receipt = remove_triangle(state, Triangle(0, 1, 2))
    assert (receipt.y_ab, receipt.y_bc, receipt.y_ac) == (2, 2, 2)
    assert receipt.dq == -4
    assert state.q == 0 and state.i == 1


@pytest.mark.parametrize("tri", list(combinations(range(5), 3)))
def test_remove_any_triangle_from_k5_leaves_three(tri):
    state = init_complete(5)
    remove_triangle(state, Triangle(*tri))
    oracle = enumerate_triangles(state.adj)
    assert len(oracle) == 3
    assert state.q == 3


def test_second_removal_on_k5_clears_everything():
    state = init_complete(5)
    remove_triangle(state, Triangle(0, 1, 2))
    assert enumerate_triangles(state.adj) == [Triangle(0, 3, 4), Triangle(1, 3, 4),
                                              Triangle(2, 3, 4)]
    receipt = remove_triangle(state, Triangle(0, 3, 4))
    assert state.q == 0 == len(enumerate_triangles(state.adj))
    assert receipt.dq == -3


def test_invalid_triangle_leaves_state_unchanged():
    state = init_complete(6)
    remove_triangle(state, Triangle(0, 1, 2))
    before = state.fingerprint()
    with pytest.raises(InvalidTriangle):
        remove_triangle(state, Triangle(0, 1, 5))
    with pytest.raises(InvalidTriangle):
        remove_triangle(state, Triangle(3, 4, 6))
    assert state.fingerprint() == before


def test_triangle_requires_sorted_distinct_vertices():
    with pytest.raises(ValueError):
        Triangle(2, 1, 3)
    assert Triangle.of(5, 0, 2) == Triangle(0, 2, 5)


# -- diagnostics -----------------------------------------------------------

def test_expected_delta_q_examples():
    assert expected_delta_q(init_complete(4)) == -4
    assert expected_delta_q(init_complete(5), exact=True) == -7


def test_expected_delta_q_on_terminated_graph():
    state = init_complete(3)
    remove_triangle(state, Triangle(0, 1, 2))
    with pytest.raises(ProcessTerminated):
        expected_delta_q(state)


@given(st.integers(4, 10), st.integers(0, 2**32), st.integers(0, 15))
def test_expected_delta_q_matches_exhaustive_average(n, seed, steps):
    state = walk(n, seed, steps)
    assert expected_delta_q(state, exact=True) == exhaustive_mean_delta_q(state.adj)


def test_sum_edge_codegrees_examples():
    state = init_complete(5)
    assert sum_edge_codegrees(state) == 30
    remove_triangle(state, Triangle(1, 2, 4))
    assert sum_edge_codegrees(state) == 9 == 3 * len(enumerate_triangles(state.adj))
    remove_triangle(state, Triangle(0, 1, 3))
    assert sum_edge_codegrees(state) == 0


@given(st.integers(3, 12), st.integers(0, 2**32))
def test_invariants_along_a_trajectory(n, seed):
    state = init_complete(n)
    rand = RandomWords(seed)
    prev = codegree_matrix(state)
    while state.q > 0:
        q_before = state.q
        out = step(state, rand)
        r = out.receipt
        assert r.dq == -(r.y_ab + r.y_bc + r.y_ac - 2)
        assert state.q == q_before + r.dq >= 0
        assert count_edges(state) == comb(n, 2) - 3 * state.i
        assert sum_edge_codegrees(state) == 3 * state.q == state.weight_total
        assert len(enumerate_triangles(state.adj)) == state.q
        y = codegree_matrix(state)
        assert np.array_equal(y, recount_codegrees(state))
        assert np.all(y <= prev)
        assert np.array_equal(state.adj, state.adj.T)
        prev = y


@pytest.mark.parametrize("n", [64, 65, 129])
def test_ledger_matches_popcount_across_word_boundaries(n):
    state = walk(n, n, 200)
    assert np.array_equal(codegree_matrix(state), recount_codegrees(state))
    assert sum_edge_codegrees(state) == 3 * state.q


def test_scan_codegrees_extremes_and_increases():
    state = walk(20, 2, 10)
    y = codegree_matrix(state)
    upper = y[np.triu_indices(20, 1)]
    current, lo, hi, inc = scan_codegrees(state)
    assert (lo, hi, inc) == (upper.min(), upper.max(), 0)
    earlier = current.copy()
    earlier[0, 1] -= 1
    _, _, _, inc = scan_codegrees(state, previous=earlier)
    assert inc == 1
