"""Shared fixtures: cached mask generation so heavy artifacts build once."""

from __future__ import annotations

import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bluenoise import MaskSpec, finalize, generate
from bluenoise.noise_zoo import independent_2d_stack, white_cube

ACCEPT_SEEDS = (101, 202, 303, 404, 505)


@lru_cache(maxsize=None)
def _stbn_cube(seed: int, x: int = 64, y: int = 64, t: int = 16) -> np.ndarray:
    spec = MaskSpec.spatiotemporal(x, y, t, seed=seed)
    return finalize(generate(spec)).payload_nd().astype(np.float64)


@lru_cache(maxsize=None)
def _stack_cube(seed: int, x: int = 64, y: int = 64, t: int = 16) -> np.ndarray:
    return independent_2d_stack(x, y, t, seed).values


@lru_cache(maxsize=None)
def _white(seed: int, x: int = 64, y: int = 64, t: int = 16) -> np.ndarray:
    return white_cube((x, y, t), seed).values


@lru_cache(maxsize=None)
def _mask2d(seed: int, n: int = 64, sigma: float = 1.9) -> np.ndarray:
    spec = MaskSpec.single_group((n, n), sigma, seed=seed)
    return finalize(generate(spec)).payload_nd().astype(np.float64)


@pytest.fixture(scope="session")
def stbn_cube():
    """Factory: seeded 64x64x16 spatiotemporal mask as a float cube."""
    return _stbn_cube


@pytest.fixture(scope="session")
def stack_cube():
    """Factory: seeded stack of independent 2D masks."""
    return _stack_cube


@pytest.fixture(scope="session")
def white():
    return _white


@pytest.fixture(scope="session")
def mask2d():
    return _mask2d
