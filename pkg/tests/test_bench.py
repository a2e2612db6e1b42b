"""Benchmark harness: schedule family, visit accounting, CSV/figure output."""
import numpy as np
import pytest

from gbsp import (
    ScheduleViolation,
    VisitCounter,
    generate,
    validate_schedule,
)
from gbsp.bench import (
    BenchRow,
    bench_schedule,
    expected_visits,
    run_bench,
    synthetic_image,
    write_csv,
    write_figure,
)


class TestBenchSchedule:
    def test_block_sides_fixed_across_image_sizes(self):
        for side in (64, 128, 256):
            sch = bench_schedule(side, 3)
            assert sch.side_lengths == (32, 16, 8)
            assert validate_schedule(sch, side) is None

    def test_budgets_half_available(self):
        sch = bench_schedule(256, 3)
        assert sch.grid_sizes == (8, 16, 32)
        assert sch.budgets == (32, 64)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ScheduleViolation):
            bench_schedule(100, 3)  # not a multiple of 32
        with pytest.raises(ScheduleViolation):
            bench_schedule(256, 0)
        with pytest.raises(ScheduleViolation):
            bench_schedule(256, 6)  # block side would drop below 2px


class TestVisitAccounting:
    def test_counter_matches_analytic_sum(self):
        for side, stages in [(64, 1), (64, 2), (128, 3)]:
            sch = bench_schedule(side, stages)
            counter = VisitCounter()
            generate(synthetic_image(side), sch, counter=counter)
            assert counter.pixels == expected_visits(side, sch)

    def test_side_doubling_multiplies_visits_by_4(self):
        rows = run_bench([64, 128], stages=3, repeat=1)
        assert rows[1].pixel_visits == 4 * rows[0].pixel_visits
        assert rows[1].pixels == 4 * rows[0].pixels

    def test_stage_doubling_tracks_accounting(self):
        # visits scale by ~2x when L doubles at fixed N; the small excess is
        # exactly the extra center-window terms of the added finer grids
        side = 128
        v2 = expected_visits(side, bench_schedule(side, 2))
        v4 = expected_visits(side, bench_schedule(side, 4))
        counter = VisitCounter()
        generate(synthetic_image(side), bench_schedule(side, 4), counter=counter)
        assert counter.pixels == v4
        assert 2.0 <= v4 / v2 <= 2.2


class TestOutputs:
    def test_csv_layout(self, tmp_path):
        rows = [BenchRow(4096, 2, 0.001234, 8272)]
        path = tmp_path / "bench.csv"
        write_csv(rows, path)
        text = path.read_text().strip().splitlines()
        assert text[0] == "pixels,stages,mean_seconds,pixel_visits"
        assert text[1] == "4096,2,0.001234,8272"

    def test_figure_rendered(self, tmp_path):
        rows = run_bench([64, 128], stages=2, repeat=1)
        path = tmp_path / "bench.png"
        write_figure(rows, path)
        assert path.stat().st_size > 0
        assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_synthetic_image_deterministic(self):
        a = synthetic_image(64)
        b = synthetic_image(64)
        assert np.array_equal(a.data, b.data)
