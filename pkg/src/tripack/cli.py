"""Command-line entry point: ``tripack {run,sweep,verify,curves}``.

Data goes to stdout (or ``--out``) and is machine-readable; progress and
diagnostics go to stderr. Exit codes: 0 success, 1 failed check, 2 usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .graph import MAX_VERTICES
from .harness import (THREADS_ENV, ExperimentConfig, default_workers, dumps_line, record_line,
                      run_sweep)
from .process import run
from .trajectory import TrajectoryParams, horizon_i0, ideal_curves, threshold_p0

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


def _int_in(lo: int, hi: int | None = None):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if value < lo or (hi is not None and value > hi):
            bound = f"[{lo}, {hi}]" if hi is not None else f">= {lo}"
            raise argparse.ArgumentTypeError(f"{value} is outside {bound}")
        return value
    return parse


def _nonneg_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not value >= 0 or value == float("inf"):
        raise argparse.ArgumentTypeError(f"{text} must be finite and non-negative")
    return value


def _grid(text: str) -> list[int]:
    parse = _int_in(1, MAX_VERTICES)
    values = [parse(part) for part in text.split(",") if part.strip()]
    if not values:
        raise argparse.ArgumentTypeError("grid is empty")
    if len(set(values)) != len(values):
        raise argparse.ArgumentTypeError(f"grid has duplicate entries: {text}")
    return sorted(values)


def _add_params(p: argparse.ArgumentParser) -> None:
    defaults = TrajectoryParams()
    g = p.add_argument_group("envelope constants")
    for name in ("c_f0", "c_flog", "c_qlow", "c_qup", "c_i0a", "c_p0"):
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=_nonneg_float,
                       default=getattr(defaults, name), metavar="X")


def _params(args) -> TrajectoryParams:
    return TrajectoryParams(args.c_f0, args.c_flog, args.c_qlow, args.c_qup, args.c_i0a, args.c_p0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tripack", description="Random greedy triangle packing on K_n.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="one full run, written as a JSONL record")
    p.add_argument("--n", type=_int_in(1, MAX_VERTICES), required=True)
    p.add_argument("--seed", type=_int_in(0, 2**64 - 1), required=True)
    p.add_argument("--stride", type=_int_in(1), default=None)
    p.add_argument("--out", type=Path, default=None)
    _add_params(p)

    p = sub.add_parser("sweep", help="replicated runs over a grid of n")
    p.add_argument("--grid", type=_grid, required=True)
    p.add_argument("--reps", type=_int_in(1), required=True)
    p.add_argument("--seed-base", type=_int_in(0, 2**64 - 1), required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--stride", type=_int_in(1), default=None)
    p.add_argument("--workers", type=_int_in(1), default=None,
                   help=f"parallel runs (default: ${THREADS_ENV} or CPU count)")
    _add_params(p)

    p = sub.add_parser("verify", help="engine vs oracle, sampler uniformity, invariants")
    p.add_argument("--n-max", type=_int_in(3, 64), default=12)
    p.add_argument("--samples", type=_int_in(600), default=120_000)
    p.add_argument("--seed", type=_int_in(0), default=0)
    p.add_argument("--runs", type=_int_in(100), default=2000,
                   help="runs per engine in the distribution check")

    p = sub.add_parser("curves", help="tabulate t, p, y, q, f, i0, p0 as CSV")
    p.add_argument("--n", type=_int_in(2), required=True)
    p.add_argument("--points", type=_int_in(2), default=21)
    _add_params(p)
    return parser


def _cmd_run(args) -> int:
    record = run(args.n, args.seed, args.stride, _params(args))
    line = dumps_line(record_line(record)) + "\n"
    if args.out is None:
        sys.stdout.write(line)
    else:
        args.out.write_text(line)
    print(f"n={record.n} M={record.M} final_edges={record.final_edges} "
          f"wall={record.wall_time:.2f}s", file=sys.stderr)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = ExperimentConfig(tuple(args.grid), args.reps, args.seed_base, args.stride,
                              _params(args), args.out, args.workers or default_workers())
    summary = run_sweep(config)
    json.dump(summary.to_dict(), sys.stdout)
    sys.stdout.write("\n")
    for line in summary.comparison:
        print(line, file=sys.stderr)
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import run_checks

    ok = True
    for result in run_checks(args.n_max, args.samples, args.seed, args.runs):
        ok &= result.passed
        sys.stdout.write(json.dumps(result.to_dict()) + "\n")
        sys.stdout.flush()
        print(f"[{'PASS' if result.passed else 'FAIL'}] {result.name}: {result.detail}",
              file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _cmd_curves(args) -> int:
    params = _params(args)
    n = args.n
    i0, p0 = horizon_i0(n, params), threshold_p0(n, params)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["t", "p", "y", "q", "f", "i0", "p0"])
    # stop short of t = 1/6 where p vanishes
    for k in range(args.points):
        t = k / args.points / 6.0
        c = ideal_curves(t, params)
        writer.writerow([repr(t), repr(c.p), repr(c.y), repr(c.q), repr(c.f), i0, repr(p0)])
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "verify": _cmd_verify, "curves": _cmd_curves}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"tripack {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"tripack {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
