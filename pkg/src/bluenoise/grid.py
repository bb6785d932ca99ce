"""Grid geometry: mask dimensions, axis groups, and toroidal distance arithmetic.

A mask lives on a D-dimensional integer lattice. The axes are partitioned into
one or more groups; each group carries its own Gaussian falloff sigma and
per-axis wrap flags. Coordinates are plain tuples of ints, axis 0 first.

Linear indexing is row-major with axis 0 fastest-varying, so a 3D mask of
sizes (X, Y, Z) stores pixel (x, y, z) at index x + X*(y + Y*z). Internally
numpy arrays use the reversed shape (Z, Y, X): C-order raveling of that shape
matches the linear index exactly, and arr[z] is a natural (Y, X) image slice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

AXIS_LETTERS = "xyzw"


def axis_label(axis: int) -> str:
    return AXIS_LETTERS[axis] if axis < len(AXIS_LETTERS) else f"a{axis}"


def toroidal_delta_sq(a: int, b: int, extent: int, toroidal: bool = True) -> int:
    """Squared 1D distance between lattice coordinates, wrapping if toroidal."""
    d = abs(a - b)
    if toroidal and extent - d < d:
        d = extent - d
    return d * d


@dataclass(frozen=True)
class AxisGroup:
    """A set of axes constrained to exhibit joint blue noise.

    sigma is the Gaussian energy falloff in pixel units, shared by all axes
    of the group. toroidal may be a single bool or one flag per axis.
    """

    axes: tuple[int, ...]
    sigma: float = 1.9
    toroidal: tuple[bool, ...] | bool = True

    def __post_init__(self):
        axes = tuple(int(a) for a in self.axes)
        if not axes:
            raise ValueError("axis group must contain at least one axis")
        if len(set(axes)) != len(axes):
            raise ValueError(f"axis group repeats an axis: {axes}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        tor = self.toroidal
        if isinstance(tor, bool):
            tor = (tor,) * len(axes)
        else:
            tor = tuple(bool(t) for t in tor)
            if len(tor) != len(axes):
                raise ValueError("toroidal flags must match the group's axis count")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "toroidal", tor)

    def toroidal_for(self, axis: int) -> bool:
        return self.toroidal[self.axes.index(axis)]

    def label(self) -> str:
        return "".join(axis_label(a) for a in self.axes)


@dataclass(frozen=True)
class MaskSpec:
    """Full description of a mask to generate.

    sizes: per-axis extents, axis 0 first.
    groups: partition of the axis indices into AxisGroups.
    seed: 64-bit seed; identical specs generate identical masks.
    initial_density: fraction of pixels turned on before ordering starts.
    """

    sizes: tuple[int, ...]
    groups: tuple[AxisGroup, ...]
    seed: int = 0
    initial_density: float = 0.10

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        groups = tuple(self.groups)
        if not sizes:
            raise ValueError("mask needs at least one axis")
        if any(s < 1 for s in sizes):
            raise ValueError(f"extents must be >= 1, got {sizes}")
        claimed = [a for g in groups for a in g.axes]
        if sorted(claimed) != list(range(len(sizes))):
            raise ValueError(
                f"groups must partition axes 0..{len(sizes) - 1}, got {claimed}"
            )
        if not 0.0 < self.initial_density <= 0.5:
            raise ValueError(
                f"initial_density must be in (0, 0.5], got {self.initial_density}"
            )
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "seed", int(self.seed))

    # -- construction helpers -------------------------------------------------

    @classmethod
    def single_group(
        cls, sizes: Sequence[int], sigma: float = 1.9, *, seed: int = 0,
        initial_density: float = 0.10, toroidal: bool = True,
    ) -> "MaskSpec":
        """Classic isotropic mask: all axes in one group."""
        group = AxisGroup(tuple(range(len(sizes))), sigma, toroidal)
        return cls(tuple(sizes), (group,), seed, initial_density)

    @classmethod
    def spatiotemporal(
        cls, width: int, height: int, frames: int, *, sigma_xy: float = 1.9,
        sigma_t: float = 1.9, seed: int = 0, initial_density: float = 0.10,
    ) -> "MaskSpec":
        """2D-by-1D mask: blue over each frame, blue along time per pixel."""
        groups = (AxisGroup((0, 1), sigma_xy), AxisGroup((2,), sigma_t))
        return cls((width, height, frames), groups, seed, initial_density)

    # -- derived geometry ------------------------------------------------------

    @property
    def ndim(self) -> int:
        return len(self.sizes)

    @cached_property
    def pixel_count(self) -> int:
        return int(np.prod(self.sizes, dtype=np.int64))

    @cached_property
    def numpy_shape(self) -> tuple[int, ...]:
        """Array shape whose C-order ravel equals the linear pixel order."""
        return tuple(reversed(self.sizes))

    @cached_property
    def strides(self) -> tuple[int, ...]:
        """Linear-index stride per axis (axis 0 has stride 1)."""
        out = []
        acc = 1
        for s in self.sizes:
            out.append(acc)
            acc *= s
        return tuple(out)

    def numpy_axis(self, axis: int) -> int:
        return self.ndim - 1 - axis

    def group_of(self, axis: int) -> AxisGroup:
        for g in self.groups:
            if axis in g.axes:
                return g
        raise ValueError(f"axis {axis} not in any group")

    # -- indexing --------------------------------------------------------------

    def validate_coord(self, p: Sequence[int]) -> tuple[int, ...]:
        p = tuple(int(c) for c in p)
        if len(p) != self.ndim:
            raise ValueError(f"coordinate {p} has wrong dimension for {self.sizes}")
        for c, s in zip(p, self.sizes):
            if not 0 <= c < s:
                raise ValueError(f"coordinate {p} out of range for sizes {self.sizes}")
        return p

    def linearize(self, p: Sequence[int]) -> int:
        p = self.validate_coord(p)
        return int(sum(c * st for c, st in zip(p, self.strides)))

    def delinearize(self, i: int) -> tuple[int, ...]:
        if not 0 <= i < self.pixel_count:
            raise ValueError(f"index {i} out of range for {self.pixel_count} pixels")
        out = []
        for s in self.sizes:
            out.append(i % s)
            i //= s
        return tuple(out)

    def delinearize_many(self, idx: np.ndarray) -> np.ndarray:
        """Vectorized delinearize: (M,) indices -> (M, ndim) coordinates."""
        idx = np.asarray(idx, dtype=np.int64)
        cols = np.unravel_index(idx, self.sizes, order="F")
        return np.stack(cols, axis=-1)


def group_distance_sq(
    p: Sequence[int], q: Sequence[int], group: AxisGroup, spec: MaskSpec
) -> int:
    """Squared distance between p and q over the group's axes only."""
    total = 0
    for a, tor in zip(group.axes, group.toroidal):
        total += toroidal_delta_sq(p[a], q[a], spec.sizes[a], tor)
    return total


def parse_sizes(text: str) -> tuple[int, ...]:
    """Parse '64x64x16' into (64, 64, 16)."""
    try:
        sizes = tuple(int(part) for part in text.lower().split("x"))
    except ValueError:
        raise ValueError(f"bad size spec {text!r}, expected e.g. 64x64x16") from None
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError(f"bad size spec {text!r}, extents must be positive")
    return sizes


def parse_groups(text: str, ndim: int) -> tuple[tuple[int, ...], ...]:
    """Parse 'xy,z' or '01,2' into axis-index tuples."""
    out = []
    for part in text.split(","):
        axes = []
        for ch in part.strip():
            if ch in AXIS_LETTERS:
                axes.append(AXIS_LETTERS.index(ch))
            elif ch.isdigit():
                axes.append(int(ch))
            else:
                raise ValueError(f"bad group spec {text!r}: unknown axis {ch!r}")
        if not axes:
            raise ValueError(f"bad group spec {text!r}: empty group")
        out.append(tuple(axes))
    claimed = [a for g in out for a in g]
    if sorted(claimed) != list(range(ndim)):
        raise ValueError(
            f"group spec {text!r} must use each of the {ndim} axes exactly once"
        )
    return tuple(out)
