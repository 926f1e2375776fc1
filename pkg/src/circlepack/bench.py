"""Benchmark harness: hit-count sweeps, mode timing, refresh-period sweeps.

Per-cell seeds derive from a base seed mixed with (n, repetition) so any
cell can be rerun in isolation and reproduce exactly.  Mean times follow
the hit-table convention: averaged over successful runs only.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .geometry import Rng, random_layout
from .layout_io import BestKnownTable, format_decimal
from .optimizer import DEFAULT_MAX_ITERATIONS, DEFAULT_REFRESH_PERIOD, bfgs_minimize
from .neighbors import DEFAULT_CONTAINER_MARGIN, DEFAULT_PAIR_MARGIN
from .search import SolveStatus, global_search

_MASK64 = (1 << 64) - 1

HITS_CSV_COLUMNS = ("n", "target_radius", "hits", "attempts", "mean_time_s")
MODES_CSV_COLUMNS = ("mode", "n", "radius", "runs", "mean_time_s", "mean_iterations")
REFRESH_CSV_COLUMNS = (
    "refresh_period", "n", "radius", "runs", "mean_time_s", "mean_iterations",
)


def _mix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed_base: int, n: int, rep: int) -> int:
    """Stable per-cell seed: ``seed_base`` xor a mix of (n, rep)."""
    return (int(seed_base) ^ _mix64((int(n) << 32) ^ int(rep))) & _MASK64


@dataclass(frozen=True)
class BenchRecord:
    """Hit statistics for one instance size at one target radius."""

    n: int
    target_radius: float
    hits: int
    attempts: int
    mean_time_s: float | None
    per_run_seeds: tuple[int, ...]


@dataclass(frozen=True)
class ModeTimingRecord:
    """Mean time to a local minimum for one optimizer mode."""

    mode: str
    n: int
    radius: float
    runs: int
    mean_time_s: float
    mean_iterations: float


@dataclass(frozen=True)
class RefreshRecord:
    """Local-mode timing for one neighbor-list refresh period."""

    refresh_period: int
    n: int
    radius: float
    runs: int
    mean_time_s: float
    mean_iterations: float


def run_hits(
    ns: Sequence[int],
    table: BestKnownTable,
    reps: int = 10,
    time_limit: float = 60.0,
    seed_base: int = 0,
    max_restarts: int | None = None,
    mode: str = "local",
    refresh_period: int = DEFAULT_REFRESH_PERIOD,
    container_margin: float = DEFAULT_CONTAINER_MARGIN,
    pair_margin: float = DEFAULT_PAIR_MARGIN,
    progress=None,
) -> list[BenchRecord]:
    """Repeat global_search at the target radius for each n.

    ``progress`` may be a callable taking each finished BenchRecord.
    """
    records = []
    for n in ns:
        radius = table.radius_for(n)
        seeds = tuple(derive_seed(seed_base, n, rep) for rep in range(reps))
        hits = 0
        times = []
        for seed in seeds:
            report = global_search(
                n,
                radius,
                time_limit,
                rng=Rng(seed),
                max_restarts=max_restarts,
                mode=mode,
                refresh_period=refresh_period,
                container_margin=container_margin,
                pair_margin=pair_margin,
            )
            if report.status is SolveStatus.FEASIBLE:
                hits += 1
                times.append(report.elapsed)
        record = BenchRecord(
            n=n,
            target_radius=radius,
            hits=hits,
            attempts=reps,
            mean_time_s=sum(times) / len(times) if times else None,
            per_run_seeds=seeds,
        )
        records.append(record)
        if progress is not None:
            progress(record)
    return records


def run_mode_timing(
    n: int,
    radius: float,
    runs: int = 10,
    seed_base: int = 0,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    refresh_period: int = DEFAULT_REFRESH_PERIOD,
    container_margin: float = DEFAULT_CONTAINER_MARGIN,
    pair_margin: float = DEFAULT_PAIR_MARGIN,
) -> list[ModeTimingRecord]:
    """Time full-mode and local-mode optimization from identical starts."""
    starts = [
        random_layout(n, radius, Rng(derive_seed(seed_base, n, rep)))
        for rep in range(runs)
    ]
    records = []
    for opt_mode in ("full", "local"):
        total = 0.0
        iterations = 0
        for layout in starts:
            tick = time.monotonic()
            outcome = bfgs_minimize(
                layout,
                max_iterations=max_iterations,
                mode=opt_mode,
                refresh_period=refresh_period,
                container_margin=container_margin,
                pair_margin=pair_margin,
            )
            total += time.monotonic() - tick
            iterations += outcome.iterations
        records.append(
            ModeTimingRecord(
                mode=opt_mode,
                n=n,
                radius=radius,
                runs=runs,
                mean_time_s=total / runs,
                mean_iterations=iterations / runs,
            )
        )
    return records


def run_refresh_sweep(
    n: int,
    radius: float,
    periods: Sequence[int],
    runs: int = 10,
    seed_base: int = 0,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    container_margin: float = DEFAULT_CONTAINER_MARGIN,
    pair_margin: float = DEFAULT_PAIR_MARGIN,
) -> list[RefreshRecord]:
    """Time local-mode optimization for each neighbor-refresh period."""
    starts = [
        random_layout(n, radius, Rng(derive_seed(seed_base, n, rep)))
        for rep in range(runs)
    ]
    records = []
    for period in periods:
        total = 0.0
        iterations = 0
        for layout in starts:
            tick = time.monotonic()
            outcome = bfgs_minimize(
                layout,
                max_iterations=max_iterations,
                mode="local",
                refresh_period=period,
                container_margin=container_margin,
                pair_margin=pair_margin,
            )
            total += time.monotonic() - tick
            iterations += outcome.iterations
        records.append(
            RefreshRecord(
                refresh_period=period,
                n=n,
                radius=radius,
                runs=runs,
                mean_time_s=total / runs,
                mean_iterations=iterations / runs,
            )
        )
    return records


def _write_csv(destination, columns, rows) -> None:
    def emit(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)

    if hasattr(destination, "write"):
        emit(destination)
    else:
        with Path(destination).open("w", encoding="utf-8", newline="") as fh:
            emit(fh)


def write_hits_csv(records: Iterable[BenchRecord], destination) -> None:
    rows = [
        (
            record.n,
            format_decimal(record.target_radius),
            record.hits,
            record.attempts,
            "" if record.mean_time_s is None else f"{record.mean_time_s:.6f}",
        )
        for record in records
    ]
    _write_csv(destination, HITS_CSV_COLUMNS, rows)


def write_modes_csv(records: Iterable[ModeTimingRecord], destination) -> None:
    rows = [
        (
            record.mode,
            record.n,
            format_decimal(record.radius),
            record.runs,
            f"{record.mean_time_s:.6f}",
            f"{record.mean_iterations:.2f}",
        )
        for record in records
    ]
    _write_csv(destination, MODES_CSV_COLUMNS, rows)


def write_refresh_csv(records: Iterable[RefreshRecord], destination) -> None:
    rows = [
        (
            record.refresh_period,
            record.n,
            format_decimal(record.radius),
            record.runs,
            f"{record.mean_time_s:.6f}",
            f"{record.mean_iterations:.2f}",
        )
        for record in records
    ]
    _write_csv(destination, REFRESH_CSV_COLUMNS, rows)


def format_hits_line(record: BenchRecord) -> str:
    mean = "-" if record.mean_time_s is None else f"{record.mean_time_s:.2f}s"
    return (
        f"n={record.n:<4d} R={record.target_radius:<14.10f} "
        f"hits={record.hits}/{record.attempts} mean={mean}"
    )
