"""Shared data model: images, scale schedules, masks, superpixels, label maps.

All types are immutable after construction and safe to share across threads.
Arrays handed to constructors are kept by reference (no copies); callers must
not mutate them afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ScheduleViolation

MAX_INTENSITY = 255


@dataclass(frozen=True, eq=False)
class RasterImage:
    """H x W x C grid of 8-bit intensities (C = 1 grayscale, 3 RGB)."""

    data: np.ndarray

    def __post_init__(self):
        if self.data.dtype != np.uint8:
            raise ValueError(f"image data must be uint8, got {self.data.dtype}")
        if self.data.ndim != 3:
            raise ValueError(f"image data must be (H, W, C), got shape {self.data.shape}")
        if self.data.shape[2] not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.data.shape[2]}")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def is_square(self) -> bool:
        return self.height == self.width

    @property
    def side(self) -> int:
        """Side length of a square image; raises for non-square inputs."""
        if not self.is_square:
            raise ValueError(f"image is {self.height}x{self.width}, not square")
        return self.height

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "RasterImage":
        """Wrap a (H, W) or (H, W, C) uint8 array without copying."""
        a = np.asarray(arr)
        if a.ndim == 2:
            a = a.reshape(a.shape[0], a.shape[1], 1)
        return cls(a)

    @classmethod
    def constant(cls, side: int, value: int, channels: int = 1) -> "RasterImage":
        return cls(np.full((side, side, channels), value, dtype=np.uint8))


@dataclass(frozen=True)
class ScaleSchedule:
    """Per-stage grid resolutions, cell side lengths and selection budgets.

    Stage ell (0-based here) partitions the image into grid_sizes[ell] x
    grid_sizes[ell] cells of side_lengths[ell] pixels each.  budgets[ell] is
    the number of cells selected at every stage but the last; the last stage
    keeps whatever is still uncovered.  center_window is the side of the k x k
    window the center statistic is taken from, tau the purity threshold.
    """

    grid_sizes: tuple[int, ...]
    side_lengths: tuple[int, ...]
    budgets: tuple[int, ...]
    center_window: int = 2
    tau: float = 10.0

    @property
    def stages(self) -> int:
        return len(self.grid_sizes)

    @property
    def image_side(self) -> int:
        """Side length implied by the first stage (r * s)."""
        return self.grid_sizes[0] * self.side_lengths[0]

    @classmethod
    def for_side(
        cls,
        image_side: int,
        grid_sizes: tuple[int, ...],
        budgets: tuple[int, ...],
        center_window: int = 2,
        tau: float = 10.0,
    ) -> "ScaleSchedule":
        """Build a schedule for a given image side, deriving cell sides."""
        sides = []
        for r in grid_sizes:
            if r <= 0 or image_side % r != 0:
                raise ScheduleViolation(
                    f"image side {image_side} is not divisible by grid size {r}"
                )
            sides.append(image_side // r)
        return cls(tuple(grid_sizes), tuple(sides), tuple(budgets), center_window, tau)


def available_cells(schedule: ScaleSchedule, stage: int) -> int:
    """Cells still uncovered on the stage grid before its selection runs.

    Coverage is data-independent: every earlier selection of K_j cells claims
    exactly K_j * (r_stage / r_j)^2 cells on this grid.
    """
    r = schedule.grid_sizes[stage]
    taken = 0
    for j in range(stage):
        t = r // schedule.grid_sizes[j]
        taken += schedule.budgets[j] * t * t
    return r * r - taken


def validate_schedule(schedule: ScaleSchedule, image_side: int) -> str | None:
    """Check every schedule invariant against an image side.

    Returns None when the schedule is valid, otherwise a message naming the
    first violated invariant (checked in a fixed order).
    """
    L = schedule.stages
    r = schedule.grid_sizes
    s = schedule.side_lengths
    k = schedule.budgets

    if L < 1:
        return "schedule must have at least one stage"
    if len(s) != L:
        return f"side_lengths has {len(s)} entries, expected {L}"
    if len(k) != L - 1:
        return f"budgets has {len(k)} entries, expected {L - 1}"
    for i in range(L):
        if r[i] <= 0:
            return f"grid_sizes[{i}]={r[i]} is not positive"
        if s[i] <= 0:
            return f"side_lengths[{i}]={s[i]} is not positive"
    for i in range(L - 1):
        if r[i + 1] <= r[i]:
            return f"grid_sizes not strictly ascending at stage {i + 1}"
        if s[i + 1] >= s[i]:
            return f"side_lengths not strictly descending at stage {i + 1}"
        if r[i + 1] % r[i] != 0:
            return f"grid_sizes[{i + 1}]={r[i + 1]} not a multiple of grid_sizes[{i}]={r[i]}"
    for i in range(L):
        if r[i] * s[i] != image_side:
            return (
                f"stage {i} does not tile the image: "
                f"{r[i]} * {s[i]} != {image_side}"
            )
    for i in range(L - 1):
        avail = available_cells(schedule, i)
        if not 0 <= k[i] <= avail:
            return f"budget[{i}]={k[i]} outside [0, {avail}] available cells"
    if schedule.center_window < 1:
        return f"center_window={schedule.center_window} is not positive"
    if schedule.center_window > s[-1]:
        return (
            f"center_window={schedule.center_window} exceeds finest cell side {s[-1]}"
        )
    return None


def require_valid(schedule: ScaleSchedule, image_side: int) -> None:
    """Raise ScheduleViolation carrying the first violation, if any."""
    report = validate_schedule(schedule, image_side)
    if report is not None:
        raise ScheduleViolation(report)


def expected_cardinality(schedule: ScaleSchedule) -> int:
    """Total region count fixed by the schedule alone.

    Sum of the selection budgets plus the finest-stage remainder: the finest
    grid has r_L^2 cells of which each stage-j selection claims
    K_j * (r_L / r_j)^2.
    """
    require_valid(schedule, schedule.image_side)
    r_last = schedule.grid_sizes[-1]
    total = r_last * r_last
    for j, budget in enumerate(schedule.budgets):
        t = r_last // schedule.grid_sizes[j]
        total += budget - budget * t * t
    return total


def stage_region_counts(schedule: ScaleSchedule) -> tuple[int, ...]:
    """Region count contributed by each stage: budgets plus the remainder."""
    remainder = available_cells(schedule, schedule.stages - 1)
    return schedule.budgets + (remainder,)


@dataclass(frozen=True, eq=False)
class ScaleMask:
    """Boolean occupancy grid at one scale (selection or coverage)."""

    grid_size: int
    bits: np.ndarray

    def __post_init__(self):
        if self.bits.shape != (self.grid_size, self.grid_size):
            raise ValueError(
                f"mask bits shape {self.bits.shape} does not match grid {self.grid_size}"
            )
        if self.bits.dtype != np.bool_:
            raise ValueError(f"mask bits must be bool, got {self.bits.dtype}")

    @property
    def popcount(self) -> int:
        return int(np.count_nonzero(self.bits))

    @classmethod
    def empty(cls, grid_size: int) -> "ScaleMask":
        return cls(grid_size, np.zeros((grid_size, grid_size), dtype=bool))

    @classmethod
    def full(cls, grid_size: int) -> "ScaleMask":
        return cls(grid_size, np.ones((grid_size, grid_size), dtype=bool))


@dataclass(frozen=True)
class Superpixel:
    """One square region: stage index, cell coordinates, side, scores.

    purity is the thresholded-indicator score of the cell (always in [0, 1]);
    center_stat the per-channel mean over the center window.
    """

    stage: int
    row: int
    col: int
    side: int
    purity: float
    center_stat: tuple[float, ...]

    @property
    def y0(self) -> int:
        return self.row * self.side

    @property
    def x0(self) -> int:
        return self.col * self.side


@dataclass(frozen=True)
class SuperpixelSet:
    """The generated multi-granularity tiling of one image.

    Regions are ordered by ascending stage, then row-major within a stage.
    """

    schedule: ScaleSchedule
    regions: tuple[Superpixel, ...]
    image_side: int

    def stage_counts(self) -> tuple[int, ...]:
        counts = [0] * self.schedule.stages
        for sp in self.regions:
            counts[sp.stage] += 1
        return tuple(counts)

    def stage_mask(self, stage: int) -> ScaleMask:
        """Rebuild the selection mask of one stage from the region list."""
        r = self.schedule.grid_sizes[stage]
        bits = np.zeros((r, r), dtype=bool)
        for sp in self.regions:
            if sp.stage == stage:
                bits[sp.row, sp.col] = True
        return ScaleMask(r, bits)


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Per-pixel region indices materializing a SuperpixelSet tiling."""

    labels: np.ndarray
    region_count: int

    def __post_init__(self):
        if self.labels.ndim != 2:
            raise ValueError(f"labels must be 2-D, got shape {self.labels.shape}")
        if self.labels.dtype != np.int32:
            raise ValueError(f"labels must be int32, got {self.labels.dtype}")

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


def pad_to_square(image: RasterImage) -> RasterImage:
    """Pad a non-square image to the larger side by edge replication.

    Padding is appended on the bottom/right so existing pixel coordinates are
    preserved.
    """
    if image.is_square:
        return image
    side = max(image.height, image.width)
    padded = np.pad(
        image.data,
        ((0, side - image.height), (0, side - image.width), (0, 0)),
        mode="edge",
    )
    return RasterImage(padded)


def resize_nearest(image: RasterImage, target_side: int) -> RasterImage:
    """Nearest-neighbor resize of a square image to target_side.

    Source index for output index i is floor(i * src / target), which keeps
    the map deterministic and intensity-preserving (no interpolation).
    """
    src = image.side
    if src == target_side:
        return image
    idx = (np.arange(target_side) * src) // target_side
    return RasterImage(image.data[idx][:, idx])


def nearest_valid_side(side: int, multiple: int, minimum: int = 0) -> int:
    """Nearest positive multiple of `multiple`, at least `minimum`."""
    units = max(1, (side + multiple // 2) // multiple)
    target = units * multiple
    while target < minimum:
        target += multiple
    return target


def normalize_image(image: RasterImage, target_side: int) -> tuple[RasterImage, dict]:
    """Pad to square then nearest-neighbor resize to target_side.

    Returns the normalized image and a metadata dict recording the original
    dimensions and whether padding/resizing happened.
    """
    meta = {
        "original_height": image.height,
        "original_width": image.width,
        "padded": not image.is_square,
    }
    squared = pad_to_square(image)
    meta["resized"] = squared.side != target_side
    return resize_nearest(squared, target_side), meta
