"""Multi-granularity square superpixels and grid-token pruning.

The library tiles an image with square regions of several sizes, chosen
coarse-to-fine by within-block homogeneity under fixed per-stage budgets, and
reuses the same block scoring to rank and drop redundant tokens on regular
encoder grids.
"""
from .bench import BenchRow, bench_schedule, expected_visits, run_bench
from .errors import (
    BudgetOverflow,
    DegenerateBlock,
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
    read_mask,
    read_report,
    read_retention,
    save_png,
    write_label_map,
    write_mask,
    write_report,
    write_retention,
)
from .hierarchy import (
    StageState,
    expand_mask,
    generate,
    select_threshold,
    select_topk,
    to_label_map,
)
from .overlay import border_mask, render_overlay
from .presets import PRESETS, Preset, default_budgets, get_preset, schedule_from_preset
from .purity import (
    VisitCounter,
    center_statistic,
    purity_grid,
    purity_indicator,
    quality_deviation,
    stage_statistics,
)
from .tokenizer import (
    TokenGrid,
    TokenRetention,
    attention_reduction,
    prune_tokens,
    stage_weights,
    token_scores,
)
from .types import (
    LabelMap,
    RasterImage,
    ScaleMask,
    ScaleSchedule,
    Superpixel,
    SuperpixelSet,
    available_cells,
    expected_cardinality,
    nearest_valid_side,
    normalize_image,
    pad_to_square,
    resize_nearest,
    require_valid,
    stage_region_counts,
    validate_schedule,
)

__version__ = "0.1.0"
