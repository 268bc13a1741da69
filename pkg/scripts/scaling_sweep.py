"""Scaling experiment: median |E(M)| against n, fitted on a log-log scale.

    python scripts/scaling_sweep.py --grid 256,512,1024,2048 --reps 32 --out results/scaling

Writes records.jsonl, summary.csv and manifest.json into --out and prints the
fitted exponent next to the 3/2 and 7/4 reference exponents.
"""

import argparse
from pathlib import Path

from tripack.harness import ExperimentConfig, default_workers, run_sweep


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--grid", default="256,512,1024,2048")
    parser.add_argument("--reps", type=int, default=32)
    parser.add_argument("--seed-base", type=int, default=2024)
    parser.add_argument("--out", type=Path, default=Path("results/scaling"))
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()

    grid = tuple(sorted(int(x) for x in args.grid.split(",")))
    config = ExperimentConfig(grid, args.reps, args.seed_base, out_dir=args.out,
                              workers=args.workers or default_workers())
    summary = run_sweep(config)
    print(f"{'n':>6} {'median':>10} {'mean':>10} {'stddev':>9} {'efficiency':>10}")
    for s in summary.per_n:
        print(f"{s.n:>6} {s.median:>10.1f} {s.mean:>10.1f} {s.stddev:>9.1f} "
              f"{s.efficiency_mean:>10.5f}")
    for line in summary.comparison:
        print(line)
    print(f"results in {args.out}")


if __name__ == "__main__":
    main()
