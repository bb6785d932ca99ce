"""Void-and-cluster mask generation over grouped axes.

The pipeline: seed an initial binary pattern, spread it out by swapping the
tightest cluster pixel for the largest void pixel until they coincide, then
assign every pixel an insertion rank in three phases:

  1. peel the initial pattern off tightest-cluster-first, ranking downward;
  2. grow the ON set largest-void-first until half the pixels are on,
     ranking upward;
  3. invert all pixel states and peel the remainder tightest-cluster-first,
     rank = how many pixels were off before each removal.

The result is a permutation of 0..N-1. Finalization maps ranks to scalar
values or k-bit integers.

Determinism: the only randomness is the initial pattern, drawn from the raw
PCG64 stream (seeded by MaskSpec.seed) through our own rejection sampler and
partial Fisher-Yates shuffle, so masks reproduce across platforms and numpy
versions. Extremum ties always resolve to the smallest linear index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .energy import EnergyField
from .grid import MaskSpec

# Progress callbacks receive (phase_name, done, total).
ProgressFn = Callable[[str, int, int], None]

REDISTRIBUTE_CAP_FACTOR = 10


class ConvergenceError(RuntimeError):
    """Initial-pattern redistribution failed to reach a fixed point."""


class _PortableRng:
    """Bounded integers from the raw PCG64 stream.

    Uses bit_generator.random_raw plus rejection sampling so the draw
    sequence depends only on the documented PCG64 stream, not on numpy's
    Generator method implementations.
    """

    def __init__(self, seed: int):
        self._bg = np.random.PCG64(seed)
        self._buf: list[int] = []

    def _next_raw(self) -> int:
        if not self._buf:
            self._buf = [int(w) for w in self._bg.random_raw(256)][::-1]
        return self._buf.pop()

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            w = self._next_raw()
            if w < limit:
                return w % n

    def sample_indices(self, n: int, count: int) -> np.ndarray:
        """count distinct indices in [0, n), by partial Fisher-Yates."""
        pool = np.arange(n, dtype=np.int64)
        for i in range(count):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return np.sort(pool[:count])


@dataclass
class BinaryPattern:
    """ON/OFF state per pixel, linear order."""

    bits: np.ndarray
    spec: MaskSpec

    @property
    def count_on(self) -> int:
        return int(self.bits.sum())


@dataclass
class RankMask:
    """Per-pixel insertion order: a permutation of 0..N-1, linear order."""

    ranks: np.ndarray
    spec: MaskSpec

    def ranks_nd(self) -> np.ndarray:
        return self.ranks.reshape(self.spec.numpy_shape)


@dataclass
class Mask:
    """Finalized scalar texture.

    payload is float32 values in [0, 1) when bit_depth is None, otherwise
    unsigned integers in [0, 2**bit_depth). Linear order. centered records
    which float convention produced the payload.
    """

    payload: np.ndarray
    spec: MaskSpec
    bit_depth: Optional[int] = None
    centered: bool = True

    def payload_nd(self) -> np.ndarray:
        return self.payload.reshape(self.spec.numpy_shape)


@dataclass
class _PipelineState:
    spec: MaskSpec
    field: EnergyField
    ranks: np.ndarray
    initial_bits: np.ndarray
    placed: int


def round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def initial_pattern(spec: MaskSpec) -> BinaryPattern:
    """Seeded random pattern with round(density * N) pixels on.

    The count is clamped to floor(N/2); at most half the pixels may start on.
    """
    n = spec.pixel_count
    count = min(round_half_up(spec.initial_density * n), n // 2)
    rng = _PortableRng(spec.seed)
    bits = np.zeros(n, dtype=bool)
    if count:
        bits[rng.sample_indices(n, count)] = True
    return BinaryPattern(bits, spec)


def redistribute(pattern: BinaryPattern, spec: MaskSpec, *, workers: int = 1,
                 progress: Optional[ProgressFn] = None) -> BinaryPattern:
    """Swap cluster pixels into voids until the removed pixel is the void.

    Preserves the ON count. Raises ConvergenceError after 10*N swaps, far
    beyond anything observed in practice.
    """
    if pattern.count_on == 0:
        return BinaryPattern(pattern.bits.copy(), spec)
    field = EnergyField.from_bits(spec, pattern.bits, workers)
    cap = REDISTRIBUTE_CAP_FACTOR * spec.pixel_count
    for it in range(cap):
        ci = field.tightest_cluster_index()
        field.deposit_index(ci, -1)
        vi = field.largest_void_index()
        field.deposit_index(vi, +1)
        if vi == ci:
            return BinaryPattern(field.on.copy(), spec)
        if progress and it % 4096 == 0:
            progress("redistribute", it, cap)
    raise ConvergenceError(
        f"redistribution did not converge within {cap} swaps"
    )


def phase1_order(pattern: BinaryPattern, spec: MaskSpec, *, workers: int = 1,
                 progress: Optional[ProgressFn] = None) -> _PipelineState:
    """Rank the initial pattern by repeated tightest-cluster removal.

    Ranks count_on-1 down to 0 are assigned; the pattern is then restored so
    phase 2 can grow from it.
    """
    n = spec.pixel_count
    ranks = np.full(n, -1, dtype=np.int64)
    initial_bits = pattern.bits.copy()
    count = pattern.count_on
    if count:
        field = EnergyField.from_bits(spec, pattern.bits, workers)
        remaining = count
        while remaining:
            ci = field.tightest_cluster_index()
            field.deposit_index(ci, -1)
            remaining -= 1
            ranks[ci] = remaining
            if progress and remaining % 4096 == 0:
                progress("phase1", count - remaining, count)
    field = EnergyField.from_bits(spec, initial_bits, workers)
    return _PipelineState(spec, field, ranks, initial_bits, count)


def phase2_fill(state: _PipelineState,
                progress: Optional[ProgressFn] = None) -> _PipelineState:
    """Grow the ON set largest-void-first until half the pixels are on."""
    n = state.spec.pixel_count
    target = n // 2
    field = state.field
    while state.placed < target:
        vi = field.largest_void_index()
        field.deposit_index(vi, +1)
        state.ranks[vi] = state.placed
        state.placed += 1
        if progress and state.placed % 4096 == 0:
            progress("phase2", state.placed, target)
    return state


def phase3_order(state: _PipelineState,
                 progress: Optional[ProgressFn] = None) -> RankMask:
    """Invert all states, then rank the rest by tightest-cluster removal."""
    spec = state.spec
    n = spec.pixel_count
    inverted = ~state.field.on
    field = EnergyField.from_bits(spec, inverted, state.field.workers)
    remaining = int(inverted.sum())
    while remaining:
        ci = field.tightest_cluster_index()
        field.deposit_index(ci, -1)
        state.ranks[ci] = n - remaining
        remaining -= 1
        if progress and remaining % 4096 == 0:
            progress("phase3", n - remaining, n)
    ranks = state.ranks
    if ranks.min() < 0:
        raise AssertionError("pipeline left unranked pixels")
    return RankMask(ranks, spec)


def generate(spec: MaskSpec, *, workers: int = 1,
             progress: Optional[ProgressFn] = None) -> RankMask:
    """Run the full pipeline for the given spec. Deterministic per seed."""
    pattern = initial_pattern(spec)
    pattern = redistribute(pattern, spec, workers=workers, progress=progress)
    state = phase1_order(pattern, spec, workers=workers, progress=progress)
    state = phase2_fill(state, progress)
    return phase3_order(state, progress)


def finalize(rank_mask: RankMask, *, bits: Optional[int] = None,
             centered: bool = True) -> Mask:
    """Map ranks to output values.

    Float mode (bits=None): (rank + 1/2) / N, which centers each quantile and
    makes the mask mean exactly 1/2; centered=False gives plain rank / N.
    k-bit mode: floor(rank * 2**bits / N), requiring N >= 2**bits so every
    level appears.
    """
    spec = rank_mask.spec
    n = spec.pixel_count
    ranks = rank_mask.ranks
    if bits is None:
        if n > (1 << 24):
            raise ValueError("float32 payload cannot resolve more than 2**24 ranks")
        offset = 0.5 if centered else 0.0
        payload = ((ranks + offset) / n).astype(np.float32)
        return Mask(payload, spec, None, centered=centered)
    if not 1 <= bits <= 16:
        raise ValueError(f"bit depth must be in 1..16, got {bits}")
    levels = 1 << bits
    if n < levels:
        raise ValueError(f"{bits}-bit payload needs at least {levels} pixels")
    dtype = np.uint8 if bits <= 8 else np.uint16
    payload = ((ranks.astype(np.uint64) * levels) // n).astype(dtype)
    return Mask(payload, spec, bits)
