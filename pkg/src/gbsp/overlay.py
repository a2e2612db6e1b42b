"""Region-border overlay rendering.

A pixel belongs to the border iff any of its 4-neighbors carries a different
label, or it lies on the image edge.  Borders are therefore exactly one pixel
wide on each side of a region boundary and drawn in a fixed color.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError
from .types import LabelMap, RasterImage

BORDER_COLOR = (255, 0, 0)


def border_mask(label_map: LabelMap) -> np.ndarray:
    """Boolean H x W mask of boundary pixels per the 4-neighborhood rule."""
    labels = label_map.labels
    border = np.zeros(labels.shape, dtype=bool)
    border[0, :] = border[-1, :] = True
    border[:, 0] = border[:, -1] = True
    border[1:, :] |= labels[1:, :] != labels[:-1, :]
    border[:-1, :] |= labels[:-1, :] != labels[1:, :]
    border[:, 1:] |= labels[:, 1:] != labels[:, :-1]
    border[:, :-1] |= labels[:, :-1] != labels[:, 1:]
    return border


def render_overlay(image: RasterImage, label_map: LabelMap) -> RasterImage:
    """Paint region borders onto an RGB copy of the image."""
    if (image.height, image.width) != (label_map.height, label_map.width):
        raise DomainError(
            f"label map {label_map.height}x{label_map.width} does not match "
            f"image {image.height}x{image.width}"
        )
    if image.channels == 1:
        rgb = np.repeat(image.data, 3, axis=2).copy()
    else:
        rgb = image.data.copy()
    rgb[border_mask(label_map)] = BORDER_COLOR
    return RasterImage(rgb)
