"""Command-line interface: generate, overlay, prune, bench.

Exit codes: 0 success, 2 unreadable/undecodable input, 3 invalid schedule or
parameters, 4 overlay dimension mismatch.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from pathlib import Path

from . import bench as bench_mod
from .errors import (
    BudgetOverflow,
    DomainError,
    FormatError,
    GBSPError,
    ImageReadError,
    ScheduleViolation,
    WindowTooLarge,
)
from .fileio import (
    load_image,
    read_label_map,
    save_png,
    write_label_map,
    write_mask,
    write_report,
    write_retention,
)
from .hierarchy import generate, to_label_map
from .overlay import render_overlay
from .presets import default_budgets, get_preset, schedule_from_preset
from .purity import VisitCounter
from .tokenizer import TokenGrid, attention_reduction, prune_tokens, token_scores
from .types import (
    RasterImage,
    ScaleSchedule,
    expected_cardinality,
    nearest_valid_side,
    normalize_image,
    require_valid,
)

log = logging.getLogger("gbsp")

EXIT_OK = 0
EXIT_IMAGE = 2
EXIT_SCHEDULE = 3
EXIT_DIMENSIONS = 4


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ScheduleViolation(f"expected comma-separated integers, got {text!r}")


def _resolve_schedule(args, image) -> tuple[ScaleSchedule, RasterImage, dict]:
    """Build the schedule from flags/preset and normalize the image to fit."""
    grids = _int_list(args.grids) if args.grids else None
    budgets = _int_list(args.budgets) if args.budgets else None

    if args.preset:
        preset = get_preset(args.preset)
        if grids is None:
            grids = preset.grid_sizes
        if grids is None:
            raise ScheduleViolation(
                f"preset {args.preset!r} does not pin grid sizes; pass --grids"
            )
        pinned_side = preset.image_side
        window, tau = preset.center_window, preset.tau
    else:
        preset = None
        if grids is None:
            raise ScheduleViolation("either --preset or --grids is required")
        pinned_side = None
        window, tau = args.window, args.tau

    if any(g <= 0 for g in grids):
        raise ScheduleViolation(f"grid sizes must be positive, got {grids}")
    side = pinned_side if pinned_side is not None else nearest_valid_side(
        max(image.height, image.width), math.lcm(*grids), minimum=window * max(grids)
    )
    normalized, meta = normalize_image(image, side)

    if preset is not None:
        if preset.name == "detection" and budgets is None:
            budgets = default_budgets(grids)
        schedule = schedule_from_preset(preset, grids, side, budgets)
    else:
        if budgets is None:
            budgets = default_budgets(grids)
            log.info("no --budgets given; defaulting to %s (half of available)", budgets)
        schedule = ScaleSchedule.for_side(side, grids, budgets, window, tau)
    require_valid(schedule, normalized.side)
    return schedule, normalized, meta


def cmd_generate(args) -> int:
    image = load_image(args.input)
    schedule, normalized, meta = _resolve_schedule(args, image)
    if args.policy == "threshold" and args.threshold is None:
        raise ScheduleViolation("--policy threshold requires --threshold")

    counter = VisitCounter()
    t0 = time.perf_counter()
    sp_set = generate(
        normalized, schedule, args.metric, args.policy, args.threshold, counter
    )
    elapsed = time.perf_counter() - t0

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    label_map = to_label_map(sp_set)
    write_label_map(label_map, out / "labels.gbsp")
    for stage in range(schedule.stages):
        write_mask(sp_set.stage_mask(stage), out / f"mask_stage{stage}.gbmk")

    report = {
        "input": args.input,
        "original_height": meta["original_height"],
        "original_width": meta["original_width"],
        "padded": meta["padded"],
        "resized": meta["resized"],
        "normalized_side": normalized.side,
        "metric": args.metric,
        "policy": args.policy,
        "stages": schedule.stages,
        "grid_sizes": ",".join(map(str, schedule.grid_sizes)),
        "side_lengths": ",".join(map(str, schedule.side_lengths)),
        "budgets": ",".join(map(str, schedule.budgets)),
        "center_window": schedule.center_window,
        "tau": schedule.tau,
        "region_count": len(sp_set.regions),
        "stage_counts": ",".join(map(str, sp_set.stage_counts())),
        "pixel_visits": counter.pixels,
        "wall_time_s": f"{elapsed:.6f}",
    }
    if args.policy == "threshold":
        report["threshold"] = args.threshold
    else:
        report["expected_region_count"] = expected_cardinality(schedule)
    write_report(report, out / "report.txt")
    log.info(
        "%d regions (%s) -> %s", len(sp_set.regions), report["stage_counts"], out
    )
    return EXIT_OK


def cmd_overlay(args) -> int:
    image = load_image(args.input)
    label_map = read_label_map(args.labels)
    if (image.height, image.width) != (label_map.height, label_map.width):
        log.error(
            "label map is %dx%d but image is %dx%d",
            label_map.height, label_map.width, image.height, image.width,
        )
        return EXIT_DIMENSIONS
    save_png(render_overlay(image, label_map), args.out)
    log.info("overlay written to %s", args.out)
    return EXIT_OK


def cmd_prune(args) -> int:
    image = load_image(args.input)
    stages = _int_list(args.stages)
    if not stages or any(s <= 0 for s in stages):
        raise ScheduleViolation(f"block sides must be positive, got {stages}")
    if args.grid < 1:
        raise ScheduleViolation(f"token grid must be positive, got {args.grid}")
    grid = TokenGrid(args.grid, stages[0])
    normalized, _ = normalize_image(image, grid.image_side)

    scores = token_scores(normalized, grid, stages, args.window, args.tau)
    retention = prune_tokens(scores, grid, args.remove)
    write_retention(retention, args.out)
    reduction = attention_reduction(grid.total, len(retention.retained))
    print(
        f"tokens={grid.total} removed={retention.removed_count} "
        f"retained={len(retention.retained)}"
    )
    print(f"attention_reduction={100.0 * reduction:.2f}%")
    return EXIT_OK


def cmd_bench(args) -> int:
    sides = _int_list(args.sides)
    rows = bench_mod.run_bench(sides, args.stages, args.repeat)
    print("pixels,stages,mean_seconds,pixel_visits")
    for row in rows:
        print(f"{row.pixels},{row.stages},{row.mean_seconds:.6f},{row.pixel_visits}")
    if args.out:
        bench_mod.write_csv(rows, args.out)
        figure = args.figure or str(Path(args.out).with_suffix(".png"))
        bench_mod.write_figure(rows, figure)
        log.info("wrote %s and %s", args.out, figure)
    elif args.figure:
        bench_mod.write_figure(rows, args.figure)
        log.info("wrote %s", args.figure)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbsp",
        description="Multi-granularity square superpixels and token pruning.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="tile an image into square superpixels")
    p.add_argument("input", help="PNG/PPM/PGM image path")
    p.add_argument("--preset", help="named configuration (mnist, cifar10, flip, detection)")
    p.add_argument("--grids", help="comma-separated cells per side, coarse to fine")
    p.add_argument("--budgets", help="comma-separated selections per coarse stage")
    p.add_argument("--tau", type=float, default=10.0, help="purity threshold")
    p.add_argument("--window", type=int, default=2, help="center window side (pixels)")
    p.add_argument("--metric", choices=("indicator", "deviation"), default="indicator")
    p.add_argument("--policy", choices=("topk", "threshold"), default="topk")
    p.add_argument("--threshold", type=float,
                   help="score cutoff for --policy threshold (cardinality varies)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("overlay", help="draw region borders over the image")
    p.add_argument("input")
    p.add_argument("--labels", required=True, help="labels.gbsp path")
    p.add_argument("--out", required=True, help="output PNG path")
    p.set_defaults(func=cmd_overlay)

    p = sub.add_parser("prune", help="rank and drop redundant encoder tokens")
    p.add_argument("input")
    p.add_argument("--grid", type=int, default=20, help="tokens per side")
    p.add_argument("--stages", default="32,16,8", help="block pixel sides, coarse first")
    p.add_argument("--tau", type=float, default=10.0)
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--remove", type=int, required=True, help="token count to drop")
    p.add_argument("--out", required=True, help="retention file path")
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("bench", help="measure scaling against image size")
    p.add_argument("--sides", default="256,512", help="comma-separated image sides")
    p.add_argument("--stages", type=int, default=3)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--figure", help="scaling plot path (defaults next to --out)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (ImageReadError, FormatError) as exc:
        log.error("%s", exc)
        return EXIT_IMAGE
    except (ScheduleViolation, BudgetOverflow, WindowTooLarge, DomainError) as exc:
        log.error("%s", exc)
        return EXIT_SCHEDULE
    except GBSPError as exc:  # any other library failure counts as bad params
        log.error("%s", exc)
        return EXIT_SCHEDULE


if __name__ == "__main__":
    sys.exit(main())
