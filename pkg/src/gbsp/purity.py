"""Block center statistics and the two homogeneity scores.

Two scores are computed from the same center statistic:

- indicator purity: fraction of block pixels whose l1 intensity deviation
  from the center mean is strictly below tau (in [0, 1], higher = purer);
- deviation quality: mean l1 deviation itself (>= 0, lower = purer).

Determinism contract: the vectorized grid pass and a naive per-cell loop
produce bit-identical indicator scores.  To that end every center mean is an
exact integer sum divided once by k*k, and per-pixel deviations are summed
channel-by-channel in a fixed order.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import DegenerateBlock, DomainError, ScheduleViolation, WindowTooLarge
from .types import RasterImage

METRICS = ("indicator", "deviation")


class VisitCounter:
    """Accumulates the number of pixel-intensity reads across stage passes."""

    def __init__(self):
        self.pixels = 0

    def add(self, n: int) -> None:
        self.pixels += int(n)


def thread_count() -> int:
    """Worker count from GBSP_THREADS: unset -> 1, 0 -> all cores, N -> N."""
    raw = os.environ.get("GBSP_THREADS")
    if raw is None or raw == "":
        return 1
    n = int(raw)
    if n < 0:
        raise DomainError(f"GBSP_THREADS={n} is negative")
    return n if n > 0 else (os.cpu_count() or 1)


def window_offset(side: int, k: int) -> int:
    """Top-left offset of the centered k-window (biased top-left when odd)."""
    return (side - k) // 2


def center_statistic(
    image: RasterImage, y0: int, x0: int, side: int, k: int = 2
) -> tuple[float, ...]:
    """Per-channel mean over the centered k x k window of one block.

    The mean is the exact integer window sum divided by k*k, so equal pixel
    data always yields the identical float.
    """
    if k < 1 or k > side:
        raise WindowTooLarge(f"center window {k} does not fit block side {side}")
    o = window_offset(side, k)
    win = image.data[y0 + o : y0 + o + k, x0 + o : x0 + o + k]
    sums = win.sum(axis=(0, 1), dtype=np.int64)
    return tuple(float(s) / (k * k) for s in sums)


def _block_deviation_field(
    image: RasterImage, y0: int, x0: int, side: int, m: tuple[float, ...]
) -> np.ndarray:
    """Per-pixel l1 deviation from m, channels accumulated left to right."""
    if side <= 0:
        raise DegenerateBlock(f"block side {side} is not positive")
    block = image.data[y0 : y0 + side, x0 : x0 + side]
    if block.shape[0] != side or block.shape[1] != side:
        raise DomainError(f"block ({y0},{x0}) side {side} exceeds image bounds")
    dev = np.abs(block[:, :, 0].astype(np.float64) - m[0])
    for c in range(1, image.channels):
        dev = dev + np.abs(block[:, :, c].astype(np.float64) - m[c])
    return dev


def purity_indicator(
    image: RasterImage, y0: int, x0: int, side: int, m: tuple[float, ...], tau: float
) -> float:
    """Fraction of block pixels with l1 deviation strictly below tau."""
    dev = _block_deviation_field(image, y0, x0, side, m)
    return int(np.count_nonzero(dev < tau)) / (side * side)


def quality_deviation(
    image: RasterImage, y0: int, x0: int, side: int, m: tuple[float, ...]
) -> float:
    """Mean l1 deviation of block pixels from m (lower = more homogeneous)."""
    dev = _block_deviation_field(image, y0, x0, side, m)
    return float(dev.sum()) / (side * side)


def _stats_band(data, gy0, gy1, r, s, k, tau, C):
    """Stage statistics for grid rows [gy0, gy1); pure function of the band."""
    o = window_offset(s, k)
    band = data[gy0 * s : gy1 * s]
    blocks = band.reshape(gy1 - gy0, s, r, s, C)
    win = blocks[:, o : o + k, :, o : o + k, :]
    sums = win.sum(axis=(1, 3), dtype=np.int64)
    means = sums / float(k * k)  # (rows, r, C)
    dev = np.abs(blocks[:, :, :, :, 0] - means[:, None, :, None, 0])
    for c in range(1, C):
        dev = dev + np.abs(blocks[:, :, :, :, c] - means[:, None, :, None, c])
    counts = np.count_nonzero(dev < tau, axis=(1, 3))
    indicator = counts / float(s * s)
    deviation = dev.sum(axis=(1, 3)) / float(s * s)
    return indicator, deviation, means


def stage_statistics(
    image: RasterImage,
    grid_size: int,
    side: int,
    k: int = 2,
    tau: float = 10.0,
    counter: VisitCounter | None = None,
):
    """One full-grid scoring pass: indicator, deviation, and center means.

    Returns (indicator r x r, deviation r x r, means r x r x C).  Each image
    pixel is read once plus k*k reads per cell for the center window, so the
    counter advances by N + r^2 k^2 regardless of metric.

    Work is split into contiguous bands of grid rows across GBSP_THREADS
    workers; every cell is a pure function of its own block, so results are
    identical for any worker count.
    """
    r, s = grid_size, side
    if r * s != image.side:
        raise ScheduleViolation(
            f"grid {r} x side {s} does not tile image side {image.side}"
        )
    if k < 1 or k > s:
        raise WindowTooLarge(f"center window {k} does not fit cell side {s}")
    C = image.channels
    data = image.data
    indicator = np.empty((r, r), dtype=np.float64)
    deviation = np.empty((r, r), dtype=np.float64)
    means = np.empty((r, r, C), dtype=np.float64)

    workers = min(thread_count(), r)
    if workers <= 1:
        indicator[:], deviation[:], means[:] = _stats_band(data, 0, r, r, s, k, tau, C)
    else:
        bounds = [r * i // workers for i in range(workers + 1)]
        def run(i):
            return bounds[i], bounds[i + 1], _stats_band(
                data, bounds[i], bounds[i + 1], r, s, k, tau, C
            )
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for g0, g1, (ind, dev, mu) in pool.map(run, range(workers)):
                indicator[g0:g1] = ind
                deviation[g0:g1] = dev
                means[g0:g1] = mu

    if counter is not None:
        counter.add(image.side * image.side + r * r * k * k)
    return indicator, deviation, means


def purity_grid(
    image: RasterImage,
    grid_size: int,
    side: int,
    k: int = 2,
    tau: float = 10.0,
    metric: str = "indicator",
    counter: VisitCounter | None = None,
) -> np.ndarray:
    """Score every cell of an r x r grid with the chosen metric."""
    if metric not in METRICS:
        raise DomainError(f"unknown metric {metric!r}, expected one of {METRICS}")
    indicator, deviation, _ = stage_statistics(image, grid_size, side, k, tau, counter)
    return indicator if metric == "indicator" else deviation
