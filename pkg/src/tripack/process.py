"""Driving the greedy process from K_n down to a triangle-free graph."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import _kernels as K
from .graph import (GraphState, ProcessTerminated, RemovalReceipt, init_complete,
                    remove_triangle, sample_uniform_triangle, scan_codegrees)
from .rng import RandomWords
from .trajectory import (DEFAULT_PARAMS, TrajectoryParams, TrajectorySnapshot, Verdict,
                         horizon_i0, take_snapshot)

VIOLATION_KEYS = ("q_lower", "q_upper", "y", "y_monotone")


@dataclass(frozen=True)
class StepOutcome:
    receipt: RemovalReceipt
    i_after: int
    q_after: int


@dataclass
class RunRecord:
    n: int
    seed: int
    M: int
    final_edges: int
    snapshots: list[TrajectorySnapshot]
    envelope_violations: dict[str, int]
    max_residual_bound: int
    checkpoint_stride: int
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "M": self.M,
            "final_edges": self.final_edges,
            "max_residual_bound": self.max_residual_bound,
            "checkpoint_stride": self.checkpoint_stride,
            "snapshots": [s.to_dict() for s in self.snapshots],
            "violations": dict(self.envelope_violations),
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        n = d["n"]
        return cls(
            n=n,
            seed=d["seed"],
            M=d["M"],
            final_edges=d["final_edges"],
            snapshots=[TrajectorySnapshot.from_dict(n, s) for s in d["snapshots"]],
            envelope_violations=dict(d["violations"]),
            max_residual_bound=d["max_residual_bound"],
            checkpoint_stride=d["checkpoint_stride"],
            wall_time=d.get("wall_time") or 0.0,
        )


def default_stride(n: int) -> int:
    """About a hundred checkpoints over the n^2/6 steps of a run."""
    return max(1, n * n // 600)


def step(state: GraphState, rand: RandomWords) -> StepOutcome:
    """Remove one uniformly random triangle."""
    if state.q == 0:
        raise ProcessTerminated("graph is triangle-free")
    receipt = remove_triangle(state, sample_uniform_triangle(state, rand))
    return StepOutcome(receipt, state.i, state.q)


def advance(state: GraphState, rand: RandomWords, stop_i: int) -> None:
    """Run compiled steps until step ``stop_i`` or termination.

    Consumes exactly the same words as repeated :func:`step` calls would.
    """
    n = state.n
    arrays = state.arrays()
    while state.q > 0 and state.i < stop_i:
        rand.reserve()
        rand.pos = int(K.advance(*arrays, n, rand.buffer, rand.pos, stop_i))
        if state.q > 0 and state.i < stop_i:
            # dry buffer mid-step: grow it so the pending step can complete
            rand.reserve(len(rand.buffer) - rand.pos + 4096)


def residual_lower_bound(state: GraphState) -> int:
    """|E(i)| - 3 Q(i); no sequel can leave fewer edges than this."""
    return state.edge_count - 3 * state.q


class _Recorder:
    """Collects checkpoint snapshots and tallies envelope violations."""

    def __init__(self, n: int, params: TrajectoryParams):
        self.n = n
        self.params = params
        self.i0 = horizon_i0(n, params) if n >= 2 else 0
        self.snapshots: list[TrajectorySnapshot] = []
        self.violations = dict.fromkeys(VIOLATION_KEYS, 0)
        self._prev = None
        self._spare = np.zeros((n, n), dtype=np.int16)

    def record(self, state: GraphState) -> None:
        current, lo, hi, increases = scan_codegrees(state, self._prev, self._spare)
        self._spare, self._prev = self._prev, current
        if self._spare is None:
            self._spare = np.zeros_like(current)
        snap = take_snapshot(state, self.params, extremes=(lo, hi), i0=self.i0)
        v = snap.verdicts
        self.violations["q_lower"] += v.q_lower_ok is Verdict.VIOLATED
        self.violations["q_upper"] += v.q_upper_ok is Verdict.VIOLATED
        self.violations["y"] += v.y_ok is Verdict.VIOLATED
        self.violations["y_monotone"] += increases
        self.snapshots.append(snap)


def run(n: int, seed: int, checkpoint_stride: int | None = None,
        envelope_params: TrajectoryParams = DEFAULT_PARAMS) -> RunRecord:
    """One full trajectory from K_n to a triangle-free graph.

    Snapshots are taken at every multiple of ``checkpoint_stride`` (step 0
    included) and at termination.
    """
    start = time.perf_counter()
    stride = default_stride(n) if checkpoint_stride is None else int(checkpoint_stride)
    if stride < 1:
        raise ValueError(f"checkpoint stride must be positive, got {stride}")
    state = init_complete(n)
    rand = RandomWords(seed)
    rec = _Recorder(n, envelope_params)
    rec.record(state)
    while state.q > 0:
        advance(state, rand, state.i + stride)
        rec.record(state)

    final_edges = state.edge_count
    assert final_edges == comb(n, 2) - 3 * state.i
    return RunRecord(
        n=n,
        seed=int(seed),
        M=state.i,
        final_edges=final_edges,
        snapshots=rec.snapshots,
        envelope_violations=rec.violations,
        max_residual_bound=max(s.residual for s in rec.snapshots),
        checkpoint_stride=stride,
        wall_time=time.perf_counter() - start,
    )
