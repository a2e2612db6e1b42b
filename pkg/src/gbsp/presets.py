"""Named generation configurations with published per-stage region counts.

A preset pins the number of regions each stage contributes (coarse budgets
plus the finest-stage remainder) along with tau and the center window.  Grid
resolutions are pinned only where published ("detection"); the others accept
any grids whose finest-stage remainder reproduces the recorded counts, which
the conformance check enforces.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ScheduleViolation
from .types import ScaleSchedule, require_valid, stage_region_counts


@dataclass(frozen=True)
class Preset:
    """One named configuration; grids/image_side are None when unpublished."""

    name: str
    stage_counts: tuple[int, ...]
    tau: float = 10.0
    center_window: int = 2
    grid_sizes: tuple[int, ...] | None = None
    image_side: int | None = None
    note: str = ""

    @property
    def stages(self) -> int:
        return len(self.stage_counts)


# stage_counts = coarse-stage budgets + finest remainder.  Example grids that
# reproduce them on the native input sides: mnist [7, 14] @ 28 (196 - 25*4 =
# 96), cifar10 [8, 16] @ 32 (256 - 45*4 = 76), flip [7, 14, 28] @ 224
# (784 - 24*16 - 50*4 = 200).
PRESETS = {
    "mnist": Preset(
        "mnist",
        stage_counts=(25, 96),
        note="two granularities, 25 coarse + 96 fine regions",
    ),
    "cifar10": Preset(
        "cifar10",
        stage_counts=(45, 76),
        note="two granularities, 45 coarse + 76 fine regions",
    ),
    "flip": Preset(
        "flip",
        stage_counts=(24, 50, 200),
        note="three granularities, 24 + 50 + 200 regions",
    ),
    "detection": Preset(
        "detection",
        stage_counts=(200, 400, 1600),
        grid_sizes=(20, 40, 80),
        image_side=640,
        note="640px encoder layout, block sides 32/16/8, tau 10; "
        "budgets default to half the cells available per coarse stage",
    ),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ScheduleViolation(
            f"unknown preset {name!r}, available: {', '.join(sorted(PRESETS))}"
        ) from None


def schedule_from_preset(
    preset: Preset,
    grid_sizes: tuple[int, ...] | None = None,
    image_side: int | None = None,
    budgets: tuple[int, ...] | None = None,
) -> ScaleSchedule:
    """Instantiate a preset against concrete grids and image side.

    Missing grids/side fall back to the preset's pinned values; presets
    without pinned grids require them from the caller.  The resulting
    schedule must reproduce the preset's per-stage region counts exactly
    (unless budgets are explicitly overridden).
    """
    grids = grid_sizes if grid_sizes is not None else preset.grid_sizes
    side = image_side if image_side is not None else preset.image_side
    if grids is None:
        raise ScheduleViolation(
            f"preset {preset.name!r} does not pin grid sizes; pass --grids"
        )
    if side is None:
        raise ScheduleViolation(
            f"preset {preset.name!r} does not pin an image side; one is required"
        )
    if len(grids) != preset.stages:
        raise ScheduleViolation(
            f"preset {preset.name!r} has {preset.stages} stages, got {len(grids)} grids"
        )
    chosen = budgets if budgets is not None else preset.stage_counts[:-1]
    schedule = ScaleSchedule.for_side(
        side, tuple(grids), tuple(chosen), preset.center_window, preset.tau
    )
    require_valid(schedule, side)
    if budgets is None and stage_region_counts(schedule) != preset.stage_counts:
        raise ScheduleViolation(
            f"grids {tuple(grids)} at side {side} yield per-stage counts "
            f"{stage_region_counts(schedule)}, preset {preset.name!r} "
            f"requires {preset.stage_counts}"
        )
    return schedule


def default_budgets(grids: tuple[int, ...]) -> tuple[int, ...]:
    """Half the cells still available at each coarse stage (detection-style)."""
    budgets: list[int] = []
    for i in range(len(grids) - 1):
        taken = 0
        for j, kj in enumerate(budgets):
            t = grids[i] // grids[j]
            taken += kj * t * t
        budgets.append((grids[i] * grids[i] - taken) // 2)
    return tuple(budgets)
