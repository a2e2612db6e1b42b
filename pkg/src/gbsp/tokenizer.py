"""Redundancy scoring and fixed-budget pruning on a regular token grid.

A token is one cell of an r x r encoder grid (e.g. 20 x 20 of 32-px cells at
640 x 640).  Redundancy blends up to three coarse-to-fine block scales: the
token's own block plus its aligned sub-blocks, each contributing
1 - min(mean_deviation / (channels * tau), 1), averaged over the token's area
and combined with weights 0.5 / 0.3 / 0.2 (renormalized when fewer stages are
given).  A perfectly flat token scores 1.0; any block at or past the
normalized deviation cap contributes 0.  Pruning removes a caller-fixed count
of the highest-redundancy tokens, never a data-dependent number.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetOverflow, DomainError, ScheduleViolation
from .purity import VisitCounter, stage_statistics
from .types import RasterImage

STAGE_WEIGHTS = (0.5, 0.3, 0.2)


@dataclass(frozen=True)
class TokenGrid:
    """Square encoder-token grid: side_tokens cells of token_pixels each."""

    side_tokens: int
    token_pixels: int

    def __post_init__(self):
        if self.side_tokens < 1 or self.token_pixels < 1:
            raise DomainError(
                f"token grid {self.side_tokens} x {self.token_pixels}px is degenerate"
            )

    @property
    def total(self) -> int:
        return self.side_tokens * self.side_tokens

    @property
    def image_side(self) -> int:
        return self.side_tokens * self.token_pixels


@dataclass(frozen=True)
class TokenRetention:
    """Outcome of one pruning run: which token indices survive."""

    grid: TokenGrid
    retained: tuple[int, ...]
    removed_count: int
    per_token_score: tuple[float, ...]

    def __post_init__(self):
        if len(self.retained) + self.removed_count != self.grid.total:
            raise DomainError(
                f"{len(self.retained)} retained + {self.removed_count} removed "
                f"!= {self.grid.total} tokens"
            )

    @property
    def retention_ratio(self) -> float:
        return len(self.retained) / self.grid.total


def stage_weights(n_stages: int) -> tuple[float, ...]:
    """Blend weights for 1..3 stages: prefix of (0.5, 0.3, 0.2), renormalized."""
    if not 1 <= n_stages <= len(STAGE_WEIGHTS):
        raise DomainError(
            f"{n_stages} stages unsupported, expected 1..{len(STAGE_WEIGHTS)}"
        )
    prefix = STAGE_WEIGHTS[:n_stages]
    total = sum(prefix)
    return tuple(w / total for w in prefix)


def token_scores(
    image: RasterImage,
    grid: TokenGrid,
    stages: tuple[int, ...],
    k: int = 2,
    tau: float = 10.0,
    counter: VisitCounter | None = None,
) -> np.ndarray:
    """Per-token redundancy in [0, 1], flat row-major; higher = more redundant.

    stages are block pixel sides, coarsest first; stages[0] must equal the
    token side so stage one aligns 1:1 with tokens, and every later side must
    divide its predecessor.
    """
    if len(stages) < 1:
        raise ScheduleViolation("at least one block stage is required")
    if stages[0] != grid.token_pixels:
        raise ScheduleViolation(
            f"coarsest block side {stages[0]} != token side {grid.token_pixels}"
        )
    for i in range(len(stages) - 1):
        if stages[i + 1] <= 0 or stages[i] % stages[i + 1] != 0:
            raise ScheduleViolation(
                f"block side {stages[i + 1]} does not divide {stages[i]}"
            )
    if image.side != grid.image_side:
        raise ScheduleViolation(
            f"image side {image.side} != token grid extent {grid.image_side}"
        )
    weights = stage_weights(len(stages))
    tau_norm = image.channels * tau  # per-pixel l1 cap: tau per channel
    if tau_norm <= 0:
        raise DomainError(f"tau {tau} must be positive")

    n = grid.side_tokens
    scores = np.zeros((n, n), dtype=np.float64)
    for w, block_side in zip(weights, stages):
        r = image.side // block_side
        _, deviation, _ = stage_statistics(image, r, block_side, k, tau, counter)
        red = 1.0 - np.minimum(deviation / tau_norm, 1.0)
        t = grid.token_pixels // block_side  # blocks per token side
        per_token = red.reshape(n, t, n, t).mean(axis=(1, 3))
        scores += w * per_token
    return scores.ravel()


def prune_tokens(scores: np.ndarray, grid: TokenGrid, n_remove: int) -> TokenRetention:
    """Drop the n_remove most redundant tokens (ties: lower index goes first)."""
    flat = np.asarray(scores, dtype=np.float64).ravel()
    if flat.size != grid.total:
        raise DomainError(f"{flat.size} scores for {grid.total} tokens")
    if not 0 <= n_remove <= grid.total:
        raise BudgetOverflow(f"cannot remove {n_remove} of {grid.total} tokens")
    order = np.argsort(-flat, kind="stable")
    removed = set(int(i) for i in order[:n_remove])
    retained = tuple(i for i in range(grid.total) if i not in removed)
    return TokenRetention(grid, retained, n_remove, tuple(float(v) for v in flat))


def attention_reduction(n_before: int, n_after: int) -> float:
    """Relative drop in quadratic self-attention cost after pruning."""
    if n_after <= 0 or n_before <= 0:
        raise DomainError(f"token counts must be positive, got {n_before}, {n_after}")
    if n_after > n_before:
        raise DomainError(f"retained {n_after} exceeds original {n_before}")
    ratio = n_after / n_before
    return 1.0 - ratio * ratio
