"""Random greedy triangle packing on K_n: fast simulation, oracle checks and sweeps."""

from .graph import (GraphState, InvalidTriangle, ProcessTerminated, RemovalReceipt, Triangle,
                    codegree, expected_delta_q, init_complete, remove_triangle,
                    sample_uniform_triangle, sum_edge_codegrees)
from .harness import ExperimentConfig, SweepSummary, fit_exponent, packing_efficiency, run_sweep
from .process import RunRecord, StepOutcome, residual_lower_bound, run, step
from .rng import RandomWords, derive_seed
from .trajectory import (EnvelopeVerdict, TrajectoryParams, TrajectorySnapshot, Verdict,
                         envelope_check, horizon_i0, ideal_curves, take_snapshot, threshold_p0)

__version__ = "0.1.0"
