"""Coarse-to-fine superpixel generation over nested square grids.

Stage after stage, the image is partitioned into r x r cells, the most
homogeneous uncovered cells are selected under a fixed budget, and the
selection is expanded onto the next finer grid as a coverage mask.  Whatever
the finest grid still leaves uncovered is kept wholesale, which makes the
total region count a function of the schedule alone.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetOverflow, DomainError, ScheduleViolation
from .purity import METRICS, VisitCounter, stage_statistics
from .types import (
    LabelMap,
    RasterImage,
    ScaleMask,
    ScaleSchedule,
    Superpixel,
    SuperpixelSet,
    require_valid,
)

POLICIES = ("topk", "threshold")


@dataclass(frozen=True, eq=False)
class StageState:
    """Coverage and selection masks of one stage, on that stage's grid."""

    stage: int
    covered: ScaleMask
    selected: ScaleMask

    def __post_init__(self):
        # selection must come from uncovered positions only
        if np.any(self.covered.bits & self.selected.bits):
            raise ScheduleViolation(
                f"stage {self.stage} selected already-covered cells"
            )


def select_topk(scores: np.ndarray, uncovered: ScaleMask, k: int) -> ScaleMask:
    """Mask of the k highest-scoring uncovered cells.

    Ties break toward the smaller row-major cell index, so equal-score
    selection is deterministic.
    """
    avail = uncovered.popcount
    if not 0 <= k <= avail:
        raise BudgetOverflow(f"budget {k} exceeds {avail} uncovered cells")
    r = uncovered.grid_size
    if scores.shape != (r, r):
        raise ScheduleViolation(
            f"score matrix {scores.shape} does not match grid {r}"
        )
    bits = np.zeros((r, r), dtype=bool)
    if k > 0:
        flat_idx = np.flatnonzero(uncovered.bits.ravel())
        # stable sort on descending score keeps ascending index within ties
        order = np.argsort(-scores.ravel()[flat_idx], kind="stable")
        chosen = flat_idx[order[:k]]
        bits.ravel()[chosen] = True
    return ScaleMask(r, bits)


def select_threshold(
    scores: np.ndarray, uncovered: ScaleMask, threshold: float, higher_is_better: bool
) -> ScaleMask:
    """Mask of all uncovered cells meeting a score threshold.

    Unlike select_topk the result size depends on the data, so schedules run
    under this policy do not honor the fixed-cardinality contract.
    """
    if higher_is_better:
        ok = scores >= threshold
    else:
        ok = scores <= threshold
    return ScaleMask(uncovered.grid_size, ok & uncovered.bits)


def expand_mask(mask: ScaleMask, child_grid: int) -> ScaleMask:
    """Map a mask to a finer grid by setting all aligned children.

    Child (i, j) is set iff parent (i // t, j // t) is, t the grid ratio.
    """
    r = mask.grid_size
    if child_grid % r != 0:
        raise ScheduleViolation(
            f"child grid {child_grid} is not a multiple of parent grid {r}"
        )
    t = child_grid // r
    bits = np.repeat(np.repeat(mask.bits, t, axis=0), t, axis=1)
    return ScaleMask(child_grid, bits)


def generate(
    image: RasterImage,
    schedule: ScaleSchedule,
    metric: str = "indicator",
    policy: str = "topk",
    threshold: float | None = None,
    counter: VisitCounter | None = None,
) -> SuperpixelSet:
    """Run the full coarse-to-fine selection and assemble the region set.

    metric picks the ranking score: "indicator" (higher = purer) or
    "deviation" (lower = purer).  policy "topk" takes the per-stage budgets
    from the schedule; "threshold" instead keeps every uncovered cell whose
    score passes `threshold`, trading fixed cardinality for adaptivity.
    Every emitted region records its indicator purity and center statistic.
    """
    if metric not in METRICS:
        raise DomainError(f"unknown metric {metric!r}, expected one of {METRICS}")
    if policy not in POLICIES:
        raise DomainError(f"unknown policy {policy!r}, expected one of {POLICIES}")
    if policy == "threshold" and threshold is None:
        raise DomainError("threshold policy requires a threshold value")
    require_valid(schedule, image.side)

    regions: list[Superpixel] = []
    covered = ScaleMask.empty(schedule.grid_sizes[0])
    for stage in range(schedule.stages):
        r = schedule.grid_sizes[stage]
        s = schedule.side_lengths[stage]
        indicator, deviation, means = stage_statistics(
            image, r, s, schedule.center_window, schedule.tau, counter
        )
        uncovered = ScaleMask(r, ~covered.bits)
        if stage < schedule.stages - 1:
            if policy == "topk":
                ranking = indicator if metric == "indicator" else -deviation
                selected = select_topk(ranking, uncovered, schedule.budgets[stage])
            else:
                score = indicator if metric == "indicator" else deviation
                selected = select_threshold(
                    score, uncovered, threshold, metric == "indicator"
                )
            state = StageState(stage, covered, selected)
            covered = expand_mask(
                ScaleMask(r, state.covered.bits | state.selected.bits),
                schedule.grid_sizes[stage + 1],
            )
        else:
            selected = StageState(stage, covered, uncovered).selected
        for row, col in np.argwhere(selected.bits):
            regions.append(
                Superpixel(
                    stage=stage,
                    row=int(row),
                    col=int(col),
                    side=s,
                    purity=float(indicator[row, col]),
                    center_stat=tuple(float(v) for v in means[row, col]),
                )
            )
    return SuperpixelSet(schedule, tuple(regions), image.side)


def to_label_map(sp_set: SuperpixelSet) -> LabelMap:
    """Materialize the tiling as per-pixel region indices."""
    side = sp_set.image_side
    labels = np.full((side, side), -1, dtype=np.int32)
    for idx, sp in enumerate(sp_set.regions):
        labels[sp.y0 : sp.y0 + sp.side, sp.x0 : sp.x0 + sp.side] = idx
    if len(sp_set.regions) and labels.min() < 0:
        raise DomainError("region set does not cover the image")
    return LabelMap(labels, len(sp_set.regions))
