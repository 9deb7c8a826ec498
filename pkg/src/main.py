#!/usr/bin/env python3
"""
Main entry point for the aggregation engine.

    python main.py scan1d --input series.csv --config config/sum.yaml
    python main.py scan2d --input image.csv --config config/abelian2d.yaml --rect 0 3 0 3
    python main.py check --config config/glimage.yaml --samples 200 --seed 1
    python main.py bench --sizes 1024 4096 --workers 1 2 4 8 --dim 32
"""
import argparse
import csv
import sys
import time
from typing import List, Optional, Sequence

import numpy as np
from dotenv import load_dotenv
from tqdm import tqdm

from category import CountingCategory, GeneralLinearCategory, Interval, IntervalAssignment, UNIT
from double_category import Rect, boundary_violation, check_crossed_module, check_double_category, free_lift
from factory import build_assignment, build_crossed_module, build_grid
from reports import format_check_report, format_prefix_grid, format_prefixes, format_single
from scan import range_query, rect_sum, scan_2d, scan_parallel, summed_area_table, up_sweep
from scan_processor import default_workers
from utils.errors import AggregationError, OutOfRange, UsageError
from utils.loaders import load_config, read_image, read_series_csv
from utils.logging_utils import log_message, setup_logging
from utils.schemas import RunConfig


class ArgumentParser(argparse.ArgumentParser):
    """Reports bad arguments as a UsageError instead of exiting."""

    def error(self, message: str):
        raise UsageError(message)


def resolve_workers(requested: Optional[int], config: Optional[RunConfig] = None) -> int:
    """--workers, then the config, then FSCAN_WORKERS, then the CPU count."""
    if requested is not None:
        if requested < 1:
            raise UsageError(f"--workers must be >= 1, got {requested}")
        return requested
    if config is not None and config.workers is not None:
        return config.workers
    return default_workers()


def emit(lines: Sequence[str]) -> None:
    sys.stdout.write("".join(f"{line}\n" for line in lines))


def cmd_scan1d(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    workers = resolve_workers(args.workers, config)
    series = read_series_csv(args.input)
    asg, cat = build_assignment(config, series)

    if args.interval is not None:
        lo, hi = args.interval
        if lo > hi:
            raise OutOfRange(f"interval [{lo},{hi}] has lo > hi")
        tree = up_sweep(asg, cat, workers)
        emit(format_single(range_query(tree, Interval(lo, hi), cat)))
        return 0

    result = scan_parallel(asg, cat, workers, config.chunk_size)
    emit(format_prefixes(result))
    return 0


def cmd_scan2d(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    workers = resolve_workers(args.workers, config)
    grid, xm = build_grid(config, read_image(args.input))

    if args.rect is None:
        emit(format_prefix_grid(scan_2d(grid, xm, workers)))
        return 0

    rect = Rect(*args.rect)
    if rect.t1 > grid.m or rect.t2 > grid.n or rect.s1 < 0 or rect.s2 < 0:
        raise OutOfRange(f"{rect} not inside the {grid.m}x{grid.n} grid")
    if config.instance == "abelian2d" and config.abelian_op == "sum":
        values = np.asarray(grid.faces, dtype=float).reshape(grid.m, grid.n)
        emit(format_single(rect_sum(summed_area_table(values), rect.s1, rect.t1, rect.s2, rect.t2)))
        return 0
    cell = free_lift(grid, rect, xm, strategy=args.strategy, seed=config.seed)
    emit(format_single(cell.face))
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    seed = config.seed if args.seed is None else args.seed
    tol = config.tolerance.boundary
    xm = build_crossed_module(config)
    log_message(f"Checking {xm.name} on {args.samples} samples (seed {seed})", "info")

    report = check_crossed_module(xm, args.samples, seed, tol)
    report.extend(check_double_category(xm, args.samples, seed, tol))

    if args.input is not None:
        grid, grid_xm = build_grid(config, read_image(args.input))
        grid_result = report.axiom("GRID_BOUNDARY")
        for i in range(grid.m):
            for j in range(grid.n):
                grid_result.record(boundary_violation(grid.cell(i, j), grid_xm), tol)

    emit(format_check_report(report))
    if not report.passed:
        log_message("Some axioms failed", "error")
        return 2
    log_message("All axioms hold", "success")
    return 0


def bench_cells(size: int, dim: int, rng: np.random.Generator) -> List[np.ndarray]:
    """Near-identity matrices, so long products stay bounded."""
    return [np.eye(dim) + rng.normal(0.0, 0.01 / np.sqrt(dim), (dim, dim)) for _ in range(size)]


def cmd_bench(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    worker_counts = [resolve_workers(w) for w in args.workers]
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["size", "workers", "seconds", "compositions_per_second", "speedup"])

    runs = [(size, workers) for size in args.sizes for workers in worker_counts]
    progress = tqdm(total=len(runs), desc="bench", file=sys.stderr, disable=not sys.stderr.isatty())
    for size in args.sizes:
        cells = bench_cells(size, args.dim, rng)
        asg = IntervalAssignment(tuple(cells), (UNIT,) * (size + 1))
        baseline = None
        for workers in worker_counts:
            cat = CountingCategory(GeneralLinearCategory(args.dim))
            start = time.perf_counter()
            scan_parallel(asg, cat, workers)
            seconds = time.perf_counter() - start
            if baseline is None or workers == 1:
                baseline = seconds
            writer.writerow([
                size,
                workers,
                f"{seconds:.6f}",
                f"{cat.count / seconds:.1f}" if seconds > 0 else "inf",
                f"{baseline / seconds:.3f}" if seconds > 0 else "inf",
            ])
            progress.update(1)
    progress.close()
    return 0


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="fscan", description="Parallel categorical aggregation")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan1d", help="prefix aggregates of a series")
    p.add_argument("--input", required=True, help="series CSV")
    p.add_argument("--config", required=True, help="run configuration (YAML or JSON)")
    p.add_argument("--interval", nargs=2, type=int, metavar=("M", "N"), help="only the lift over [M, N]")
    p.add_argument("--workers", type=int)
    p.set_defaults(handler=cmd_scan1d)

    p = sub.add_parser("scan2d", help="prefix aggregates of an image grid")
    p.add_argument("--input", required=True, help="image CSV or binary PPM")
    p.add_argument("--config", required=True)
    p.add_argument("--rect", nargs=4, type=int, metavar=("S1", "T1", "S2", "T2"),
                   help="only the lift over [S1, T1] x [S2, T2]")
    p.add_argument("--strategy", choices=["leftmost", "midpoint", "random"], default="midpoint")
    p.add_argument("--workers", type=int)
    p.set_defaults(handler=cmd_scan2d)

    p = sub.add_parser("check", help="sample the crossed-module and double-category laws")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--input", help="also check the boundary law on this image's grid")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("bench", help="scan throughput against the worker count")
    p.add_argument("--sizes", nargs="+", type=int, default=[1024, 4096])
    p.add_argument("--workers", nargs="+", type=int, default=[1, 2, 4, 8])
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_bench)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse `argv`, run the subcommand and return its exit code."""
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
        setup_logging("INFO" if args.verbose else None)
        return args.handler(args)
    except AggregationError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
