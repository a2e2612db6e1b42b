"""Scaling benchmark: pixel-visit counts and wall time versus image size.

The synthetic schedule family keeps block pixel sides fixed (32, 16, 8, ...)
so grid resolutions grow with the image side and the analytic visit count
sum_l (N + r_l^2 k^2) is exactly proportional to N.  Doubling the side must
therefore multiply the visit counter by exactly 4 at fixed stage count.
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ScheduleViolation
from .hierarchy import generate
from .purity import VisitCounter
from .types import RasterImage, ScaleSchedule

BASE_BLOCK_SIDE = 32  # coarsest stage; halves per extra stage
RNG_SEED = 1234


@dataclass(frozen=True)
class BenchRow:
    """One benchmark measurement at a fixed image size and stage count."""

    pixels: int
    stages: int
    mean_seconds: float
    pixel_visits: int


def bench_schedule(image_side: int, stages: int) -> ScaleSchedule:
    """Fixed-block-side schedule: sides 32/16/8/... with half-full budgets."""
    if stages < 1:
        raise ScheduleViolation("stage count must be at least 1")
    block_sides = [BASE_BLOCK_SIDE >> i for i in range(stages)]
    if block_sides[-1] < 2:
        raise ScheduleViolation(f"{stages} stages drive block side below 2px")
    if image_side % BASE_BLOCK_SIDE != 0:
        raise ScheduleViolation(
            f"bench side {image_side} must be a multiple of {BASE_BLOCK_SIDE}"
        )
    grids = tuple(image_side // b for b in block_sides)
    budgets: list[int] = []
    for i in range(stages - 1):
        taken = sum(k * (grids[i] // grids[j]) ** 2 for j, k in enumerate(budgets))
        budgets.append((grids[i] * grids[i] - taken) // 2)
    return ScaleSchedule.for_side(image_side, grids, tuple(budgets))


def expected_visits(image_side: int, schedule: ScaleSchedule) -> int:
    """Analytic pixel-read count: per stage, N plus r^2 center windows."""
    n = image_side * image_side
    k = schedule.center_window
    return sum(n + r * r * k * k for r in schedule.grid_sizes)


def synthetic_image(side: int, channels: int = 3) -> RasterImage:
    rng = np.random.default_rng(RNG_SEED)
    return RasterImage(rng.integers(0, 256, (side, side, channels), dtype=np.uint8))


def run_bench(
    sides: list[int], stages: int = 3, repeat: int = 3, channels: int = 3
) -> list[BenchRow]:
    rows = []
    for side in sides:
        schedule = bench_schedule(side, stages)
        image = synthetic_image(side, channels)
        counter = VisitCounter()
        generate(image, schedule, counter=counter)  # warm-up + instrumented
        visits = counter.pixels
        times = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            generate(image, schedule)
            times.append(time.perf_counter() - t0)
        rows.append(BenchRow(side * side, stages, sum(times) / len(times), visits))
    return rows


def write_csv(rows: list[BenchRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pixels", "stages", "mean_seconds", "pixel_visits"])
        for row in rows:
            writer.writerow(
                [row.pixels, row.stages, f"{row.mean_seconds:.6f}", row.pixel_visits]
            )


def write_figure(rows: list[BenchRow], path: str | Path) -> None:
    """Visit counts and wall time against N, to check the linear trend."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    pixels = [r.pixels for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(pixels, [r.pixel_visits for r in rows], "o-")
    ax1.set_xlabel("pixels N")
    ax1.set_ylabel("pixel visits")
    ax1.set_title(f"instrumented visits (L={rows[0].stages if rows else 0})")
    ax2.plot(pixels, [r.mean_seconds for r in rows], "o-", color="tab:orange")
    ax2.set_xlabel("pixels N")
    ax2.set_ylabel("mean seconds")
    ax2.set_title("wall time")
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
