"""Thresholded point sets and importance-driven sample selection.

Thresholding a rank mask at fraction t keeps exactly floor(t*N) pixels: the
ones inserted first. Thresholds nest, so raising t only adds points. For
masks already finalized to floats the value order recovers the rank order
exactly; quantized payloads are rejected because their ties would make the
count inexact.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .generator import Mask, RankMask
from .grid import MaskSpec


@dataclass
class PointSet:
    """Coordinates surviving a threshold, ordered by insertion rank.

    points is (M, ndim) with spec-axis column order; ranks[i] is the rank of
    points[i]. slice_axis/slice_counts report the per-slice distribution
    along one axis when requested.
    """

    points: np.ndarray
    ranks: np.ndarray
    threshold: float
    spec: MaskSpec
    slice_axis: Optional[int] = None
    slice_counts: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.points)


def _rank_order(source: Union[RankMask, Mask]) -> tuple[np.ndarray, MaskSpec]:
    """Pixel linear indices sorted by insertion rank."""
    if isinstance(source, RankMask):
        ranks = source.ranks
        order = np.empty(source.spec.pixel_count, dtype=np.int64)
        order[ranks] = np.arange(source.spec.pixel_count)
        return order, source.spec
    if isinstance(source, Mask):
        if source.bit_depth is not None:
            raise ValueError(
                "cannot threshold a quantized mask exactly; use the rank "
                "mask or a float payload"
            )
        return np.argsort(source.payload, kind="stable"), source.spec
    raise TypeError(f"cannot threshold {type(source).__name__}")


def threshold_points(source: Union[RankMask, Mask], t: float,
                     slice_axis: Optional[int] = None) -> PointSet:
    """Points with rank < floor(t * N), in rank order."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {t}")
    order, spec = _rank_order(source)
    count = int(np.floor(t * spec.pixel_count))
    sel = order[:count]
    points = spec.delinearize_many(sel) if count else np.empty((0, spec.ndim), np.int64)
    counts = None
    if slice_axis is not None:
        if not 0 <= slice_axis < spec.ndim:
            raise ValueError(f"slice axis {slice_axis} out of range")
        counts = np.bincount(
            points[:, slice_axis], minlength=spec.sizes[slice_axis]
        ) if count else np.zeros(spec.sizes[slice_axis], dtype=np.int64)
    return PointSet(points, np.arange(count, dtype=np.int64), float(t), spec,
                    slice_axis, counts)


def select_samples(importance: np.ndarray, mask_values: np.ndarray) -> np.ndarray:
    """Per-pixel decision: sample where the importance exceeds the mask value."""
    importance = np.asarray(importance, dtype=np.float64)
    mask_values = np.asarray(mask_values, dtype=np.float64)
    if importance.shape != mask_values.shape:
        raise ValueError(
            f"shape mismatch: importance {importance.shape} vs mask "
            f"{mask_values.shape}"
        )
    return importance > mask_values


@dataclass
class CoverageReport:
    """How evenly repeated selections cover the pixel grid."""

    frames: int
    unique_fraction: float          # pixels selected at least once
    selection_histogram: np.ndarray  # histogram of per-pixel selection counts
    per_frame_fraction: np.ndarray   # fraction selected in each frame


def coverage_stats(decisions: np.ndarray) -> CoverageReport:
    """Summarize a (frames, ...) stack of boolean selection maps."""
    decisions = np.asarray(decisions, dtype=bool)
    if decisions.ndim < 2:
        raise ValueError("need a stack of decision maps, frames first")
    frames = decisions.shape[0]
    counts = decisions.sum(axis=0)
    flat = decisions.reshape(frames, -1)
    return CoverageReport(
        frames=frames,
        unique_fraction=float((counts > 0).mean()),
        selection_histogram=np.bincount(counts.ravel(), minlength=frames + 1),
        per_frame_fraction=flat.mean(axis=1),
    )


def write_points_csv(ps: PointSet, path) -> None:
    """Rows: rank then one column per axis coordinate."""
    from .grid import axis_label

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rank"] + [axis_label(a) for a in range(ps.spec.ndim)])
        for r, pt in zip(ps.ranks, ps.points):
            w.writerow([int(r)] + [int(c) for c in pt])


def write_points_u16(ps: PointSet, path) -> None:
    """Packed little-endian u16 triples (x, y, z); 2D points get z = 0."""
    if ps.spec.ndim > 3:
        raise ValueError("binary export supports at most 3 axes; use CSV")
    if any(s > 0xFFFF for s in ps.spec.sizes):
        raise ValueError("coordinates exceed u16 range")
    pts = np.zeros((len(ps), 3), dtype="<u2")
    pts[:, : ps.spec.ndim] = ps.points
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", len(ps)))
        fh.write(pts.tobytes())
