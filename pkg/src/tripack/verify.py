"""Self-checks of the fast engine against the brute-force oracle.

Each check returns a :class:`CheckResult`; :func:`run_checks` runs them all.
These are the same properties the test suite pins down, packaged so that
``tripack verify`` can run them on an installed copy.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .graph import (codegree, codegree_matrix, count_edges, expected_delta_q, init_complete,
                    recount_codegrees, sample_triangles, sample_uniform_triangle,
                    sum_edge_codegrees)
from .oracle import (chi_square_uniformity, enumerate_triangles, exhaustive_mean_delta_q,
                     naive_run, sampler_rank_counts, two_sample_chi_square)
from .process import residual_lower_bound, run, step
from .rng import RandomWords

FORCED_OUTCOMES = {3: (1, 0), 4: (1, 3), 5: (2, 4)}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"check": self.name, "passed": self.passed, "detail": self.detail}


def check_forced_outcomes(seeds: int = 50) -> CheckResult:
    bad = []
    for n, expected in FORCED_OUTCOMES.items():
        for seed in range(seeds):
            for label, rec in (("fast", run(n, seed)), ("naive", naive_run(n, seed))):
                if (rec.M, rec.final_edges) != expected:
                    bad.append(f"{label} n={n} seed={seed} -> {(rec.M, rec.final_edges)}")
    return CheckResult("forced_outcomes", not bad, "; ".join(bad[:5]) or f"{seeds} seeds x n=3,4,5")


def replay_problems(n: int, seed: int, exhaustive_limit: int = 64) -> list[str]:
    """Replay one trajectory step by step and report every broken invariant."""
    problems = []
    state = init_complete(n)
    rand = RandomWords(seed)
    prev_y = codegree_matrix(state)
    residuals = [residual_lower_bound(state)]

    def fail(msg):
        problems.append(f"n={n} seed={seed} i={state.i}: {msg}")

    while state.q > 0:
        before = state.fingerprint()
        sample_uniform_triangle(state, copy.deepcopy(rand))
        if state.fingerprint() != before:
            fail("sampling mutated the state")
        q_before = state.q
        out = step(state, rand)
        r = out.receipt
        if r.dq != -(r.y_ab + r.y_bc + r.y_ac - 2) or out.q_after != q_before + r.dq:
            fail(f"bad receipt {r}")
        if count_edges(state) != comb(n, 2) - 3 * state.i:
            fail("edge count differs from C(n,2) - 3i")
        s = sum_edge_codegrees(state)
        if s != 3 * state.q or state.weight_total != 3 * state.q:
            fail(f"edge co-degree sum {s}, index total {state.weight_total}, 3Q {3 * state.q}")
        if state.q < 0:
            fail("negative Q")
        if len(enumerate_triangles(state.adj)) != state.q:
            fail("Q differs from enumerated triangle count")
        y = codegree_matrix(state)
        if n <= exhaustive_limit and not np.array_equal(y, recount_codegrees(state)):
            fail("co-degree ledger differs from popcount recount")
        if np.any(y > prev_y):
            fail("a co-degree increased")
        prev_y = y
        residuals.append(residual_lower_bound(state))
    if max(residuals) > state.edge_count:
        fail("residual bound exceeded the final edge count")
    return problems


def check_replay(n_max: int, seeds: int = 3) -> CheckResult:
    problems = []
    for n in range(3, n_max + 1):
        for seed in range(seeds):
            problems += replay_problems(n, seed)
    return CheckResult("replay_invariants", not problems,
                       "; ".join(problems[:5]) or f"n=3..{n_max}, {seeds} seeds each")


def mid_process_states(n: int, count: int, seed: int):
    """States reached by stopping seeded runs at random points with Q > 0."""
    pick = RandomWords(seed + 1)
    for k in range(count):
        state = init_complete(n)
        rand = RandomWords(seed * 1000 + k)
        stop = pick.bounded(n * n // 6 + 1)
        while state.q > 0 and state.i < stop:
            before = state.copy()
            step(state, rand)
            if state.q == 0:
                state = before
                break
        yield state


def check_sampler_exactness(n_max: int, states: int = 5) -> CheckResult:
    bad = []
    for n in range(3, min(n_max, 9) + 1):
        for state in mid_process_states(n, states, seed=n):
            probs, hits = sampler_rank_counts(state)
            if len(probs) != state.q or any(p != Fraction(1, state.q) for p in probs.values()):
                bad.append(f"n={n} i={state.i}: non-uniform triangle probabilities")
            if any(h != codegree(state, u, v) for (u, v), h in hits.items()):
                bad.append(f"n={n} i={state.i}: edge rank counts differ from co-degrees")
    return CheckResult("sampler_exactness", not bad, "; ".join(bad[:5]) or "exact 1/Q everywhere")


def check_expected_delta(n: int, states: int = 20) -> CheckResult:
    bad = []
    for state in mid_process_states(n, states, seed=97):
        got = expected_delta_q(state, exact=True)
        want = exhaustive_mean_delta_q(state.adj)
        if got != want:
            bad.append(f"i={state.i}: {got} != {want}")
    return CheckResult("expected_delta_q", not bad,
                       "; ".join(bad[:5]) or f"{states} states at n={n}, exact agreement")


def uniformity_counts(n: int, samples: int, seed: int) -> tuple[np.ndarray, float]:
    """Counts of first-step triangle draws on K_n, indexed lexicographically."""
    state = init_complete(n)
    draws = sample_triangles(state, RandomWords(seed), samples)
    index = {(t.a, t.b, t.c): k for k, t in enumerate(enumerate_triangles(state.adj))}
    counts = np.zeros(len(index), dtype=np.int64)
    for a, b, c in draws.tolist():
        counts[index[(a, b, c)]] += 1
    return counts, samples / len(index)


def check_uniformity(samples: int, seed: int = 0, n: int = 10) -> CheckResult:
    counts, expected = uniformity_counts(n, samples, seed)
    res = chi_square_uniformity(counts, expected)
    return CheckResult("sampler_uniformity", res.passed,
                       f"K{n}: chi2={res.statistic:.2f} dof={res.dof} threshold={res.threshold:.2f}")


def check_determinism(n: int, seed: int = 11) -> CheckResult:
    a, b = run(n, seed), run(n, seed)
    return CheckResult("determinism", a == b, f"n={n} seed={seed}")


def check_distribution(n_max: int, runs: int = 2000) -> CheckResult:
    details, ok = [], True
    for n in range(6, min(n_max, 8) + 1):
        fast = [run(n, 10_000_000 + s).final_edges for s in range(runs)]
        slow = [naive_run(n, 20_000_000 + s).final_edges for s in range(runs)]
        res = two_sample_chi_square(fast, slow)
        ok &= res.passed
        details.append(f"n={n}: chi2={res.statistic:.2f} dof={res.dof} thr={res.threshold:.2f}")
    return CheckResult("oracle_distribution", ok, "; ".join(details) or "skipped (n_max < 6)")


def run_checks(n_max: int = 12, samples: int = 120_000, seed: int = 0, runs: int = 2000):
    yield check_forced_outcomes()
    yield check_replay(n_max)
    yield check_sampler_exactness(n_max)
    yield check_expected_delta(n_max)
    yield check_uniformity(samples, seed)
    yield check_determinism(n_max)
    yield check_distribution(n_max, runs)
