"""Selection, expansion, and end-to-end generation properties."""
import numpy as np
import pytest

from gbsp import (
    BudgetOverflow,
    DomainError,
    RasterImage,
    ScaleMask,
    ScaleSchedule,
    ScheduleViolation,
    StageState,
    expand_mask,
    expected_cardinality,
    generate,
    select_threshold,
    select_topk,
    to_label_map,
)

import oracles


def schedule(side, grids, budgets, window=2, tau=10.0):
    return ScaleSchedule.for_side(side, tuple(grids), tuple(budgets), window, tau)


def mask_from_cells(r, cells):
    bits = np.zeros((r, r), dtype=bool)
    for y, x in cells:
        bits[y, x] = True
    return ScaleMask(r, bits)


class TestSelectTopK:
    def test_all_equal_scores_tie_break_row_major(self):
        scores = np.ones((4, 4))
        got = select_topk(scores, ScaleMask.full(4), 3)
        assert sorted(map(tuple, np.argwhere(got.bits))) == [(0, 0), (0, 1), (0, 2)]

    def test_zero_budget_empty(self):
        got = select_topk(np.ones((4, 4)), ScaleMask.full(4), 0)
        assert got.popcount == 0

    def test_budget_overflow(self):
        uncovered = mask_from_cells(4, [(0, 0), (1, 1)])
        with pytest.raises(BudgetOverflow):
            select_topk(np.ones((4, 4)), uncovered, 3)

    def test_respects_uncovered_mask(self):
        scores = np.zeros((3, 3))
        scores[0, 0] = 9.0  # best cell, but covered
        uncovered = mask_from_cells(3, [(1, 1), (2, 2)])
        got = select_topk(scores, uncovered, 1)
        assert list(map(tuple, np.argwhere(got.bits))) == [(1, 1)]

    def test_matches_full_sort_oracle(self, rng):
        for _ in range(200):
            r = int(rng.integers(2, 9))
            scores = rng.choice([0.0, 0.25, 0.5, 1.0], size=(r, r))  # force ties
            uncovered_bits = rng.random((r, r)) < 0.7
            uncovered = ScaleMask(r, uncovered_bits)
            k = int(rng.integers(0, uncovered.popcount + 1))
            got = select_topk(scores, uncovered, k)
            want = oracles.topk(scores, uncovered_bits, k)
            assert {tuple(c) for c in np.argwhere(got.bits)} == want

    def test_score_shape_mismatch(self):
        with pytest.raises(ScheduleViolation):
            select_topk(np.ones((3, 3)), ScaleMask.full(4), 1)


class TestSelectThreshold:
    def test_higher_is_better_keeps_at_or_above(self):
        scores = np.array([[0.2, 0.5], [0.8, 1.0]])
        got = select_threshold(scores, ScaleMask.full(2), 0.5, True)
        assert {tuple(c) for c in np.argwhere(got.bits)} == {(0, 1), (1, 0), (1, 1)}

    def test_lower_is_better_keeps_at_or_below(self):
        scores = np.array([[3.0, 12.0], [9.0, 30.0]])
        got = select_threshold(scores, ScaleMask.full(2), 9.0, False)
        assert {tuple(c) for c in np.argwhere(got.bits)} == {(0, 0), (1, 0)}

    def test_covered_cells_never_selected(self):
        scores = np.ones((2, 2))
        uncovered = mask_from_cells(2, [(0, 0)])
        got = select_threshold(scores, uncovered, 0.0, True)
        assert got.popcount == 1


class TestExpandMask:
    def test_empty_stays_empty(self):
        assert expand_mask(ScaleMask.empty(4), 8).popcount == 0

    def test_single_parent_maps_to_aligned_children(self):
        got = expand_mask(mask_from_cells(4, [(1, 2)]), 8)
        assert {tuple(c) for c in np.argwhere(got.bits)} == {
            (2, 4), (2, 5), (3, 4), (3, 5)
        }

    def test_full_stays_full(self):
        got = expand_mask(ScaleMask.full(4), 8)
        assert got.popcount == 64

    def test_non_integral_ratio_rejected(self):
        with pytest.raises(ScheduleViolation):
            expand_mask(ScaleMask.full(4), 6)

    def test_popcount_scales_by_ratio_squared(self, rng):
        for _ in range(100):
            r = int(rng.integers(1, 9))
            t = int(rng.choice([2, 3, 4]))
            bits = rng.random((r, r)) < 0.4
            got = expand_mask(ScaleMask(r, bits), r * t)
            assert got.popcount == t * t * int(bits.sum())
            assert np.array_equal(got.bits, oracles.expand(bits, r * t))


class TestGenerate:
    def test_constant_image_hand_trace(self):
        # all scores tie at 1.0, so stage one picks the first 4 row-major
        # cells; everything else splits into 8x8-grid cells of side 4
        img = RasterImage.constant(32, 77, 3)
        sp = generate(img, schedule(32, [4, 8], [4]))
        assert len(sp.regions) == 52
        coarse = [(r.row, r.col) for r in sp.regions if r.stage == 0]
        assert coarse == [(0, 0), (0, 1), (0, 2), (0, 3)]
        fine = [r for r in sp.regions if r.stage == 1]
        assert len(fine) == 48
        assert all(r.side == 4 for r in fine)
        assert all(r.purity == 1.0 for r in sp.regions)
        assert all(r.center_stat == (77.0, 77.0, 77.0) for r in sp.regions)

    def test_single_stage_plain_partition(self):
        img = RasterImage.constant(16, 5, 1)
        sp = generate(img, schedule(16, [4], []))
        assert len(sp.regions) == 16
        assert [(r.row, r.col) for r in sp.regions] == [
            (y, x) for y in range(4) for x in range(4)
        ]

    def test_detection_layout_sides(self):
        img = RasterImage.constant(640, 128, 3)
        sp = generate(img, schedule(640, [20, 40, 80], [200, 400]))
        assert sp.schedule.side_lengths == (32, 16, 8)
        assert len(sp.regions) == expected_cardinality(sp.schedule)

    def test_purity_ordering_within_stage(self, rng):
        # every selected cell scores >= every unselected uncovered cell
        for _ in range(20):
            data = oracles.random_image(rng, 32)
            img = RasterImage(data)
            sch = schedule(32, [4, 8], [7], tau=30.0)
            sp = generate(img, sch)
            grid = oracles.purity_grid(data, 4, 8, 2, 30.0)
            selected = {(r.row, r.col) for r in sp.regions if r.stage == 0}
            unselected = {
                (y, x) for y in range(4) for x in range(4)
            } - selected
            if unselected:
                assert min(grid[c] for c in selected) >= max(
                    grid[c] for c in unselected
                )

    def test_selected_regions_disjoint_on_finest_grid(self, rng):
        for _ in range(20):
            grids, budgets, side = oracles.random_valid_schedule(rng, max_side=72)
            sch = schedule(side, grids, budgets)
            sp = generate(RasterImage(oracles.random_image(rng, side)), sch)
            fine = grids[-1]
            counts = np.zeros((fine, fine), dtype=int)
            for region in sp.regions:
                t = fine // grids[region.stage]
                counts[
                    region.row * t : (region.row + 1) * t,
                    region.col * t : (region.col + 1) * t,
                ] += 1
            assert np.all(counts == 1)

    def test_deviation_metric_prefers_flat_cells(self):
        # quadrant (0,0) is noisy, rest is flat; with K=3 the flat cells win
        rng = np.random.default_rng(3)
        data = np.full((16, 16, 1), 100, dtype=np.uint8)
        data[:8, :8, 0] = rng.integers(0, 256, (8, 8))
        sp = generate(RasterImage(data), schedule(16, [2, 4], [3]), metric="deviation")
        coarse = {(r.row, r.col) for r in sp.regions if r.stage == 0}
        assert coarse == {(0, 1), (1, 0), (1, 1)}

    def test_threshold_policy_varies_cardinality(self):
        data = np.full((16, 16, 1), 10, dtype=np.uint8)
        data[:8, :8, 0] = np.arange(64).reshape(8, 8) * 3  # impure quadrant
        img = RasterImage(data)
        sch = schedule(16, [2, 4], [0])
        keep_all = generate(img, sch, policy="threshold", threshold=0.0)
        keep_pure = generate(img, sch, policy="threshold", threshold=0.9)
        assert len(keep_all.regions) == 4  # every coarse cell passes at 0.0
        assert len(keep_pure.regions) == 3 + 4  # impure quadrant splits
        with pytest.raises(DomainError):
            generate(img, sch, policy="threshold")

    def test_unknown_metric_and_policy(self):
        img = RasterImage.constant(16, 0, 1)
        with pytest.raises(DomainError):
            generate(img, schedule(16, [4], []), metric="l2")
        with pytest.raises(DomainError):
            generate(img, schedule(16, [4], []), policy="greedy")

    def test_invalid_schedule_propagates(self):
        img = RasterImage.constant(16, 0, 1)
        with pytest.raises(ScheduleViolation):
            generate(img, schedule(32, [4, 8], [4]))

    def test_determinism_bit_identical(self, rng):
        data = oracles.random_image(rng, 48)
        img = RasterImage(data)
        sch = schedule(48, [4, 12], [9])
        a = generate(img, sch)
        b = generate(img, sch)
        assert a.regions == b.regions


class TestStageState:
    def test_overlapping_selection_rejected(self):
        covered = mask_from_cells(4, [(0, 0)])
        with pytest.raises(ScheduleViolation):
            StageState(0, covered, mask_from_cells(4, [(0, 0), (1, 1)]))


class TestToLabelMap:
    def test_single_region(self):
        img = RasterImage.constant(4, 0, 1)
        sp = generate(img, schedule(4, [1], []))
        lm = to_label_map(sp)
        assert np.all(lm.labels == 0) and lm.region_count == 1

    def test_traced_example_counts(self):
        img = RasterImage.constant(32, 77, 3)
        lm = to_label_map(generate(img, schedule(32, [4, 8], [4])))
        counts = np.bincount(lm.labels.ravel(), minlength=52)
        assert sorted(counts.tolist()) == [16] * 48 + [64] * 4
        assert lm.labels.max() == 51 and lm.labels.min() == 0

    def test_roundtrip_reconstructs_region_pixels(self, rng):
        for _ in range(10):
            grids, budgets, side = oracles.random_valid_schedule(rng, max_side=64)
            sp = generate(
                RasterImage(oracles.random_image(rng, side)),
                schedule(side, grids, budgets),
            )
            lm = to_label_map(sp)
            for idx, region in enumerate(sp.regions):
                ys, xs = np.nonzero(lm.labels == idx)
                assert len(ys) == region.side * region.side
                assert ys.min() == region.y0 and xs.min() == region.x0
                assert ys.max() == region.y0 + region.side - 1
