"""In-process binding over the gbsp core for DL preprocessing pipelines.

Wraps generate/to_label_map/prune_tokens over caller-owned array buffers so
pipelines can consume label maps and retention sets without file I/O.  The
binding never copies input buffers: views that would require one (wrong dtype,
non-contiguous layout) are rejected instead.  Calls are synchronous and
reentrant; internal parallelism follows GBSP_THREADS like the core.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from gbsp import (
    DomainError,
    RasterImage,
    ScaleSchedule,
    TokenGrid,
    generate,
    get_preset,
    prune_tokens,
    schedule_from_preset,
    to_label_map,
    token_scores,
)

__version__ = "0.1.0"
__all__ = ["ArrayImageView", "bridge_generate", "bridge_prune", "copy_count"]

# Buffer copies made by this module since import.  The binding is zero-copy
# by construction (offending inputs raise instead), so this must stay 0; it
# exists so callers can assert that in their own harnesses.
_COPIES = 0


def copy_count() -> int:
    return _COPIES


@dataclass(frozen=True)
class ArrayImageView:
    """Zero-copy view of caller memory: contiguous row-major 8-bit pixels.

    The caller guarantees the buffer stays valid and unmodified for the
    duration of any call the view is passed to.
    """

    height: int
    width: int
    channels: int
    buffer: np.ndarray

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise DomainError(f"empty view: {self.height}x{self.width}")
        if self.channels not in (1, 3):
            raise DomainError(f"channels must be 1 or 3, got {self.channels}")
        if self.buffer.dtype != np.uint8:
            raise DomainError(f"buffer must be uint8, got {self.buffer.dtype}")
        if not self.buffer.flags["C_CONTIGUOUS"]:
            raise DomainError("buffer must be C-contiguous; refusing to copy")
        want = self.height * self.width * self.channels
        if self.buffer.size != want:
            raise DomainError(
                f"buffer holds {self.buffer.size} samples, expected {want} "
                f"({self.height}x{self.width}x{self.channels})"
            )

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ArrayImageView":
        """View an existing (H, W) or (H, W, C) uint8 array."""
        if arr.ndim == 2:
            h, w = arr.shape
            c = 1
        elif arr.ndim == 3:
            h, w, c = arr.shape
        else:
            raise DomainError(f"expected 2-D or 3-D array, got {arr.ndim}-D")
        return cls(h, w, c, arr)

    @classmethod
    def from_bytes(cls, raw: bytes, height: int, width: int, channels: int) -> "ArrayImageView":
        """View a raw byte string (read-only, still zero-copy)."""
        return cls(height, width, channels, np.frombuffer(raw, dtype=np.uint8))

    def as_image(self) -> RasterImage:
        # reshape of a contiguous buffer is a view, never a copy
        data = self.buffer.reshape(self.height, self.width, self.channels)
        return RasterImage(data)


def _resolve_schedule(
    side: int,
    grid_sizes: Optional[Sequence[int]],
    budgets: Optional[Sequence[int]],
    preset: Optional[str],
    center_window: int,
    tau: float,
) -> ScaleSchedule:
    if preset is not None:
        return schedule_from_preset(
            get_preset(preset),
            tuple(grid_sizes) if grid_sizes is not None else None,
            side,
            tuple(budgets) if budgets is not None else None,
        )
    if grid_sizes is None:
        raise DomainError("grid_sizes is required when no preset is given")
    if budgets is None:
        raise DomainError("budgets is required when no preset is given")
    return ScaleSchedule.for_side(
        side, tuple(grid_sizes), tuple(budgets),
        center_window=center_window, tau=tau,
    )


def bridge_generate(
    view: ArrayImageView,
    grid_sizes: Optional[Sequence[int]] = None,
    budgets: Optional[Sequence[int]] = None,
    *,
    preset: Optional[str] = None,
    metric: str = "indicator",
    center_window: int = 2,
    tau: float = 10.0,
) -> tuple[np.ndarray, list[tuple[int, int, int, int, float]]]:
    """Run superpixel generation over a buffer view.

    Returns the (H, W) int32 label array and the region table: one row
    (stage, row, col, side, purity) per region, in label order.  Unlike the
    CLI there is no resize/pad step -- the view must already be square with
    a side the schedule tiles exactly, otherwise the schedule validator's
    report is raised as the exception message.
    """
    image = view.as_image()
    schedule = _resolve_schedule(
        image.side, grid_sizes, budgets, preset, center_window, tau
    )
    sp_set = generate(image, schedule, metric=metric)
    labels = to_label_map(sp_set).labels
    table = [
        (r.stage, r.row, r.col, r.side, r.purity) for r in sp_set.regions
    ]
    return labels, table


def bridge_prune(
    view: ArrayImageView,
    grid: int,
    stages: Sequence[int],
    tau: float,
    n_remove: int,
) -> np.ndarray:
    """Score tokens over a buffer view and drop the n_remove most redundant.

    Returns the retained token indices as an ascending int64 array; same
    semantics as the CLI prune subcommand minus the resize step.
    """
    if not stages:
        raise DomainError("at least one block side is required")
    token_grid = TokenGrid(grid, stages[0])
    scores = token_scores(view.as_image(), token_grid, tuple(stages), tau=tau)
    retention = prune_tokens(scores, token_grid, n_remove)
    return np.asarray(retention.retained, dtype=np.int64)
