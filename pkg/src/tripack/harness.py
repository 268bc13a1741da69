"""Monte Carlo sweeps over n, exponent fits and result files.

A sweep writes three files into its output directory:

* ``records.jsonl``: one line per run, ordered by (n, replicate)
* ``summary.csv``:   one row per n, preceded by a ``# schema_version: 1`` line
* ``manifest.json``: file list, record count and a completion flag

Both data files carry ``schema_version`` 1. Apart from the ``wall_time``
field the JSONL bytes depend only on the configuration, not on scheduling;
:func:`canonical_digest` hashes a JSONL file with ``wall_time`` stripped.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import multiprocessing
import os
import statistics
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Iterable, Sequence

from scipy import stats

from .process import VIOLATION_KEYS, RunRecord, run
from .rng import derive_seed
from .trajectory import DEFAULT_PARAMS, TrajectoryParams

SCHEMA_VERSION = 1
THREADS_ENV = "PACK_THREADS"
CSV_COLUMNS = ("n", "reps", "min", "median", "mean", "max", "stddev",
               "efficiency_mean", "ref_n32", "ref_n74log")


class SweepIOError(OSError):
    """Writing sweep output failed; ``manifest`` describes what made it to disk."""

    def __init__(self, message: str, manifest: dict):
        super().__init__(message)
        self.manifest = manifest


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        width = int(env)
        if width < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return width
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ExperimentConfig:
    n_grid: tuple[int, ...]
    reps: int
    seed_base: int = 0
    checkpoint_stride: int | None = None  # None: per-n default
    params: TrajectoryParams = DEFAULT_PARAMS
    out_dir: Path | None = None
    workers: int | None = None

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        if not grid:
            raise ValueError("n_grid must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError(f"n_grid must be strictly increasing, got {grid}")
        if grid[0] < 1:
            raise ValueError("vertex counts must be positive")
        if self.reps < 1:
            raise ValueError(f"reps must be at least 1, got {self.reps}")
        if self.checkpoint_stride is not None and self.checkpoint_stride < 1:
            raise ValueError("checkpoint_stride must be positive")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be positive")
        if self.out_dir is not None:
            object.__setattr__(self, "out_dir", Path(self.out_dir))


@dataclass
class NStats:
    n: int
    reps: int
    min: int
    median: float
    mean: float
    max: int
    stddev: float
    efficiency_mean: float
    efficiency_se: float
    ref_n32: float
    ref_n74log: float
    violations: dict[str, int]

    def csv_row(self) -> list:
        return [self.n, self.reps, self.min, self.median, self.mean, self.max, self.stddev,
                self.efficiency_mean, self.ref_n32, self.ref_n74log]


@dataclass
class SweepSummary:
    per_n: list[NStats]
    slope: float | None
    intercept: float | None
    stderr: float | None
    violation_totals: dict[str, int]
    comparison: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "per_n": [vars(s) for s in self.per_n],
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "violation_totals": self.violation_totals,
            "comparison": self.comparison,
        }


def packing_efficiency(record: RunRecord) -> float:
    """Removed triangles as a fraction of the volume bound C(n, 2) / 3."""
    if record.n < 3:
        raise ValueError(f"efficiency needs n >= 3, got {record.n}")
    return 3 * record.M / comb(record.n, 2)


def theorem_reference(n: int) -> float:
    """n^(7/4) (ln n)^(5/4)."""
    return n ** 1.75 * math.log(n) ** 1.25


def conjecture_reference(n: int) -> float:
    """n^(3/2)."""
    return n ** 1.5


def fit_exponent(points: Sequence[tuple[int, float]]) -> tuple[float, float, float]:
    """Least squares of ln(median) on ln(n); returns (slope, intercept, stderr)."""
    ns = [p[0] for p in points]
    ys = [p[1] for p in points]
    if len(set(ns)) < 2:
        raise ValueError("need at least two distinct n")
    if any(n <= 0 for n in ns):
        raise ValueError("n must be positive")
    if any(y <= 0 for y in ys):
        raise ValueError(f"medians must be positive, got {ys}")
    fit = stats.linregress([math.log(n) for n in ns], [math.log(y) for y in ys])
    stderr = 0.0 if len(points) == 2 else float(fit.stderr)
    return float(fit.slope), float(fit.intercept), stderr


def record_line(record: RunRecord, replicate: int | None = None) -> dict:
    """JSONL payload of one run."""
    d = {"schema_version": SCHEMA_VERSION, "n": record.n}
    if replicate is not None:
        d["replicate"] = replicate
    body = record.to_dict()
    body["efficiency"] = packing_efficiency(record) if record.n >= 3 else None
    d.update(body)
    return d


def dumps_line(payload: dict) -> str:
    return json.dumps(payload, separators=(",", ":"))


def canonical_digest(path: Path | str) -> str:
    """SHA-256 of a JSONL file with every ``wall_time`` field removed."""
    h = hashlib.sha256()
    with open(path) as fh:
        for line in fh:
            payload = json.loads(line)
            payload.pop("wall_time", None)
            h.update(dumps_line(payload).encode())
            h.update(b"\n")
    return h.hexdigest()


def summarize_n(n: int, records: Sequence[RunRecord]) -> NStats:
    finals = [r.final_edges for r in records]
    reps = len(finals)
    effs = [packing_efficiency(r) for r in records] if n >= 3 else [float("nan")] * reps
    eff_sd = statistics.stdev(effs) if reps > 1 else 0.0
    violations = dict.fromkeys(VIOLATION_KEYS, 0)
    for r in records:
        for k, v in r.envelope_violations.items():
            violations[k] = violations.get(k, 0) + v
    return NStats(
        n=n,
        reps=reps,
        min=min(finals),
        median=float(statistics.median(finals)),
        mean=statistics.fmean(finals),
        max=max(finals),
        stddev=statistics.stdev(finals) if reps > 1 else 0.0,
        efficiency_mean=statistics.fmean(effs),
        efficiency_se=eff_sd / math.sqrt(reps),
        ref_n32=conjecture_reference(n),
        ref_n74log=theorem_reference(n) if n >= 2 else 0.0,
        violations=violations,
    )


def _comparison_lines(per_n: list[NStats], slope, stderr) -> list[str]:
    lines = []
    if slope is not None:
        lines.append(f"fitted exponent of median |E(M)|: {slope:.4f} +/- {stderr:.4f}")
        lines.append(f"conjectured exponent 1.5: difference {slope - 1.5:+.4f}")
        lines.append(f"theorem exponent 1.75 (times log^1.25): difference {slope - 1.75:+.4f}")
    for s in per_n:
        if s.n >= 2:
            lines.append(
                f"n={s.n}: median/n^1.5 = {s.median / s.ref_n32:.4f}, "
                f"median/(n^1.75 ln^1.25 n) = {s.median / s.ref_n74log:.5f}"
            )
    return lines


def _task(args) -> RunRecord:
    n, replicate, seed, stride, params = args
    return run(n, seed, stride, params)


def _tasks(config: ExperimentConfig):
    for n in config.n_grid:
        for rep in range(config.reps):
            yield (n, rep, derive_seed(config.seed_base, n, rep), config.checkpoint_stride,
                   config.params)


def _records(config: ExperimentConfig) -> Iterable[RunRecord]:
    """Run every task; yields records in (n, replicate) order regardless of width."""
    width = config.workers or default_workers()
    tasks = list(_tasks(config))
    if width == 1:
        yield from map(_task, tasks)
        return
    with multiprocessing.get_context("fork").Pool(width) as pool:
        yield from pool.imap(_task, tasks, chunksize=1)


def _write_manifest(out_dir: Path, manifest: dict) -> None:
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def run_sweep(config: ExperimentConfig) -> SweepSummary:
    """Execute ``reps`` runs per n, write result files (if ``out_dir``) and summarize."""
    out_dir = config.out_dir
    manifest = {"schema_version": SCHEMA_VERSION, "complete": False, "records_written": 0,
                "files": []}
    fh = None
    try:
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            fh = open(out_dir / "records.jsonl", "w")
            manifest["files"].append("records.jsonl")
        by_n: dict[int, list[RunRecord]] = {n: [] for n in config.n_grid}
        for (n, rep, _, _, _), record in zip(_tasks(config), _records(config)):
            by_n[n].append(record)
            if fh is not None:
                fh.write(dumps_line(record_line(record, rep)) + "\n")
                manifest["records_written"] += 1
        if fh is not None:
            fh.close()
            fh = None

        per_n = [summarize_n(n, by_n[n]) for n in config.n_grid]
        if out_dir is not None:
            with open(out_dir / "summary.csv", "w", newline="") as cf:
                cf.write(f"# schema_version: {SCHEMA_VERSION}\n")
                writer = csv.writer(cf)
                writer.writerow(CSV_COLUMNS)
                for s in per_n:
                    writer.writerow(s.csv_row())
            manifest["files"].append("summary.csv")
    except OSError as exc:
        if fh is not None:
            fh.close()
        manifest["error"] = str(exc)
        if out_dir is not None:
            try:
                _write_manifest(out_dir, manifest)
            except OSError:
                pass
        raise SweepIOError(f"sweep output failed: {exc}", manifest) from exc

    fit_points = [(s.n, s.median) for s in per_n if s.median > 0]
    slope = intercept = stderr = None
    if len(fit_points) >= 2:
        slope, intercept, stderr = fit_exponent(fit_points)
    totals = dict.fromkeys(VIOLATION_KEYS, 0)
    for s in per_n:
        for k, v in s.violations.items():
            totals[k] = totals.get(k, 0) + v
    summary = SweepSummary(per_n, slope, intercept, stderr, totals,
                           _comparison_lines(per_n, slope, stderr))
    if out_dir is not None:
        manifest["complete"] = True
        _write_manifest(out_dir, manifest)
    return summary


def read_records(path: Path | str) -> list[RunRecord]:
    with open(path) as fh:
        return [RunRecord.from_dict(json.loads(line)) for line in fh]
