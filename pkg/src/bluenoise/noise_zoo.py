"""Baseline and comparison noise constructions.

White noise cubes, stacks of independently generated 2D masks, golden-ratio
animated masks, R2 lattice offsets for decorrelated texture reads, and
ordinal seed retargeting. Isotropic 3D blue noise needs no dedicated entry
point: it is `generate` with a single group spanning all axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .generator import Mask, finalize, generate
from .grid import MaskSpec

#: frac(golden ratio) = (sqrt(5) - 1) / 2, the additive recurrence step.
GOLDEN_STEP = (np.sqrt(5.0) - 1.0) / 2.0

#: Plastic constant: the real root of g**3 = g + 1.
PLASTIC = 1.324717957244746


@dataclass
class NoiseCube:
    """A stack of scalar frames in [0, 1) with a provenance tag.

    values has numpy layout (frames, ..., height, width): axis 0 is time.
    """

    values: np.ndarray
    provenance: str

    @property
    def frames(self) -> int:
        return self.values.shape[0]


def white_cube(sizes: Sequence[int], seed: int) -> NoiseCube:
    """I.i.d. uniform [0,1) noise, seeded. sizes are spec-axis order."""
    rng = np.random.Generator(np.random.PCG64(seed))
    shape = tuple(reversed([int(s) for s in sizes]))
    return NoiseCube(rng.random(shape), "white")


def stack_seed(seed: int, frame: int) -> int:
    """Derived per-frame seed, stable across platforms."""
    child = np.random.SeedSequence(seed, spawn_key=(frame,))
    w = child.generate_state(2, np.uint32)
    return int(w[0]) | (int(w[1]) << 32)


def independent_2d_stack(
    x: int, y: int, t: int, seed: int, *, sigma: float = 1.9,
    initial_density: float = 0.10,
) -> NoiseCube:
    """t independently generated 2D masks stacked along time.

    Each slice is spatial blue noise; any pixel's sequence over time is
    white, since the slices share nothing but the parent seed.
    """
    slices = []
    for n in range(t):
        spec = MaskSpec.single_group(
            (x, y), sigma, seed=stack_seed(seed, n),
            initial_density=initial_density,
        )
        slices.append(finalize(generate(spec)).payload_nd().astype(np.float64))
    return NoiseCube(np.stack(slices), "2d-stack")


def golden_ratio_animate(base: Mask | np.ndarray, frames: int) -> NoiseCube:
    """Animate a 2D mask by adding the golden-ratio step each frame, mod 1.

    Frame 0 is the base mask itself; each pixel then follows the golden
    ratio additive recurrence over time.
    """
    if isinstance(base, Mask):
        if base.bit_depth is not None:
            raise ValueError("golden-ratio animation needs a float mask")
        vals = base.payload_nd().astype(np.float64)
    else:
        vals = np.asarray(base, dtype=np.float64)
    if vals.ndim != 2:
        raise ValueError("base mask must be 2D")
    steps = np.arange(frames, dtype=np.float64) * GOLDEN_STEP
    return NoiseCube((vals[None, :, :] + steps[:, None, None]) % 1.0, "golden-ratio")


def r2_offsets(n: int) -> np.ndarray:
    """First n points of the R2 lattice: frac(k * (1/g, 1/g**2)), g plastic.

    Successive points stay nearly maximally spaced, which makes them good
    pixel offsets for decorrelated reads of one mask. Point 0 is the origin.
    """
    if n < 1:
        raise ValueError("need at least one offset")
    alpha = np.array([1.0 / PLASTIC, 1.0 / PLASTIC ** 2])
    k = np.arange(n, dtype=np.float64)[:, None]
    return (k * alpha) % 1.0


def hb_retarget(
    seeds: np.ndarray, rendered: np.ndarray, target: np.ndarray,
    patch: int = 8,
) -> np.ndarray:
    """Permute per-pixel seeds so rendered ranks line up with target ranks.

    Within each patch x patch tile, the seed whose rendered value holds
    ordinal rank r moves to the pixel whose target value holds ordinal rank
    r. Per tile the output is a permutation of the input seeds, so a
    monotone renderer reproduces the target's rank order exactly on the next
    frame. Ties resolve by pixel index (stable sort).
    """
    seeds = np.asarray(seeds)
    rendered = np.asarray(rendered)
    target = np.asarray(target)
    if not seeds.shape == rendered.shape == target.shape:
        raise ValueError("seeds, rendered, and target must share one shape")
    if seeds.ndim != 2:
        raise ValueError("retargeting operates on 2D images")
    h, w = seeds.shape
    if patch < 1 or h % patch or w % patch:
        raise ValueError(f"patch {patch} must divide image extents {h}x{w}")
    out = np.empty_like(seeds)
    for i in range(0, h, patch):
        for j in range(0, w, patch):
            tile = np.s_[i : i + patch, j : j + patch]
            s = seeds[tile].ravel()
            r_order = np.argsort(rendered[tile].ravel(), kind="stable")
            t_order = np.argsort(target[tile].ravel(), kind="stable")
            permuted = np.empty_like(s)
            permuted[t_order] = s[r_order]
            out[tile] = permuted.reshape(patch, patch)
    return out
