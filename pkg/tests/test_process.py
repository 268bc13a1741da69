import json
from itertools import combinations
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tripack.graph import ProcessTerminated, Triangle, count_edges, init_complete, remove_triangle
from tripack.oracle import enumerate_triangles
from tripack.process import RunRecord, advance, default_stride, residual_lower_bound, run, step
from tripack.rng import RandomWords


def test_step_on_k3():
    state = init_complete(3)
    out = step(state, RandomWords(0))
    assert (out.q_after, out.i_after) == (0, 1)
    with pytest.raises(ProcessTerminated):
        step(state, RandomWords(0))


@pytest.mark.parametrize("seed", range(10))
def test_step_on_k4_leaves_a_star(seed):
    state = init_complete(4)
    out = step(state, RandomWords(seed))
    assert out.q_after == 0
    untouched = ({0, 1, 2, 3} - {out.receipt.triangle.a, out.receipt.triangle.b,
                                  out.receipt.triangle.c}).pop()
    remaining = {(u, v) for u, v in combinations(range(4), 2) if state.has_edge(u, v)}
    assert len(remaining) == 3
    assert all(untouched in e for e in remaining)


def test_k5_terminates_after_two_steps_on_every_trajectory():
    # brute force over the whole trajectory tree of K5
    lengths = set()
    for first in combinations(range(5), 3):
        adj = ~np.eye(5, dtype=bool)
        for u, v in Triangle(*first).edges():
            adj[u, v] = adj[v, u] = False
        for second in enumerate_triangles(adj):
            adj2 = adj.copy()
            for u, v in second.edges():
                adj2[u, v] = adj2[v, u] = False
            lengths.add(2 if not enumerate_triangles(adj2) else 3)
    assert lengths == {2}


@pytest.mark.parametrize("seed", range(20))
def test_engine_k5_two_steps(seed):
    state = init_complete(5)
    rand = RandomWords(seed)
    step(state, rand)
    assert state.q == 3
    step(state, rand)
    assert state.q == 0


@pytest.mark.parametrize("n, M, final", [(3, 1, 0), (4, 1, 3), (5, 2, 4)])
@pytest.mark.parametrize("seed", [0, 1, 12345, 2**63])
def test_run_forced_outcomes(n, M, final, seed):
    rec = run(n, seed)
    assert (rec.M, rec.final_edges) == (M, final)
    assert rec.max_residual_bound == final


@pytest.mark.parametrize("n", [1, 2])
def test_run_degenerate(n):
    rec = run(n, 7)
    assert rec.M == 0
    assert rec.final_edges == comb(n, 2)
    assert len(rec.snapshots) == 1


def test_residual_lower_bound_examples():
    state = init_complete(5)
    assert residual_lower_bound(state) == -20
    rand = RandomWords(3)
    while state.q:
        step(state, rand)
    assert residual_lower_bound(state) == 4 == state.edge_count


@given(st.integers(3, 40), st.integers(0, 2**40))
def test_run_record_invariants(n, seed):
    rec = run(n, seed)
    assert rec.final_edges == comb(n, 2) - 3 * rec.M
    assert rec.max_residual_bound <= rec.final_edges
    assert rec.snapshots[-1].q_actual == 0
    assert rec.snapshots[-1].i == rec.M
    assert rec.envelope_violations["y_monotone"] == 0
    assert all(s.i % rec.checkpoint_stride == 0 for s in rec.snapshots[:-1])


@given(st.integers(3, 30), st.integers(0, 2**40))
def test_run_matches_step_by_step_replay(n, seed):
    rec = run(n, seed)
    state = init_complete(n)
    rand = RandomWords(seed)
    while state.q:
        step(state, rand)
    assert state.i == rec.M
    assert count_edges(state) == rec.final_edges


def test_advance_is_chunk_independent():
    a, b = init_complete(60), init_complete(60)
    ra, rb = RandomWords(5), RandomWords(5)
    advance(a, ra, 10**9)
    for stop in range(7, 10**6, 7):
        advance(b, rb, stop)
        if b.q == 0:
            break
    assert a.fingerprint() == b.fingerprint()


def test_determinism_and_roundtrip():
    a, b = run(48, 99), run(48, 99)
    assert a == b
    d = json.loads(json.dumps(a.to_dict()))
    back = RunRecord.from_dict(d)
    assert back == a
    assert [s.verdicts for s in back.snapshots] == [s.verdicts for s in a.snapshots]


def test_different_seeds_differ():
    assert run(60, 1).snapshots != run(60, 2).snapshots


def test_checkpoint_stride():
    assert default_stride(10) == 1
    assert default_stride(2048) == 2048 * 2048 // 600
    rec = run(30, 4, checkpoint_stride=5)
    steps = [s.i for s in rec.snapshots]
    assert steps[:-1] == list(range(0, rec.M, 5))[: len(steps) - 1]
    assert steps[-1] == rec.M
    with pytest.raises(ValueError):
        run(30, 4, checkpoint_stride=0)


def test_remove_then_run_state_is_consistent():
    state = init_complete(6)
    remove_triangle(state, Triangle(0, 1, 2))
    rand = RandomWords(1)
    while state.q:
        step(state, rand)
    assert not enumerate_triangles(state.adj)
