"""Shared fixtures; this file also puts tests/ on sys.path for oracles.py."""
import numpy as np
import pytest

from gbsp import RasterImage


@pytest.fixture
def rng():
    return np.random.default_rng(20240814)


@pytest.fixture
def checker32():
    """32x32 grayscale checkerboard of 8px tiles: cells are internally flat."""
    tile = np.repeat(np.repeat(np.array([[0, 255], [255, 0]]), 8, 0), 8, 1)
    data = np.tile(tile, (2, 2)).astype(np.uint8).reshape(32, 32, 1)
    return RasterImage(data)
