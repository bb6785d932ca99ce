"""Gaussian pair energy and the incrementally maintained energy field.

Every ON pixel deposits energy into the field. For each axis group the
contribution to pixel q is exp(-d^2 / (2 sigma^2)) with d the (optionally
toroidal) distance over the group's axes, and it applies only where p and q
agree on every axis outside the group. The per-pixel field value is the sum
of these contributions over all ON pixels and all groups; the pixel's own
contribution (one unit per group) is included.

A deposit therefore touches, per group, the hyperplane of pixels matching p
on the complementary axes, never the whole grid (unless a group spans all
axes). Field values are accumulated in float64. Bulk rebuilds go through an
FFT circular convolution per group when that group wraps on all its axes.

Extremum queries (max over ON pixels, min over OFF pixels) break ties toward
the smallest linear index. Multi-group specs keep per-slab cached extrema
along the last axis so a query costs one slab rescan instead of a full grid
scan; the caches are plain copies of field values and are revalidated by the
brute-force oracle tests.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .grid import AxisGroup, MaskSpec, group_distance_sq

# Full-grid extremum scans switch to chunked parallel reduction above this
# pixel count when workers > 1.
PARALLEL_SCAN_MIN_PIXELS = 1 << 20


def pair_energy(p: Sequence[int], q: Sequence[int], spec: MaskSpec) -> float:
    """Energy pixel p gives to pixel q: sum of per-group Gaussian terms."""
    p = spec.validate_coord(p)
    q = spec.validate_coord(q)
    total = 0.0
    for g in spec.groups:
        if all(p[a] == q[a] for a in range(spec.ndim) if a not in g.axes):
            dsq = group_distance_sq(p, q, g, spec)
            total += math.exp(-dsq / (2.0 * g.sigma * g.sigma))
    return total


class _GroupGeometry:
    """Precomputed deposit geometry for one axis group."""

    def __init__(self, group: AxisGroup, spec: MaskSpec):
        self.group = group
        self.spec = spec
        # Subarray axes appear in descending spec-axis order.
        self.axes_desc = tuple(sorted(group.axes, reverse=True))
        self.other_axes = tuple(a for a in range(spec.ndim) if a not in group.axes)
        self.all_toroidal = all(group.toroidal)
        denom = 2.0 * group.sigma * group.sigma
        # Per-axis kernel tables sliced per deposit: toroidal axes store the
        # circular kernel twice over so [s-c : 2s-c] is the roll by c;
        # non-toroidal axes store offsets -(s-1)..(s-1) so [s-1-c : 2s-1-c]
        # is the clipped window centered at c. Both are views, never copies.
        self._tables: list[tuple[int, np.ndarray, int]] = []
        for a in self.axes_desc:
            s = spec.sizes[a]
            if group.toroidal_for(a):
                d = np.arange(s)
                d = np.minimum(d, s - d).astype(np.float64)
                base = np.exp(-(d ** 2) / denom)
                self._tables.append((a, np.concatenate([base, base]), s))
            else:
                d = np.arange(-(s - 1), s, dtype=np.float64)
                self._tables.append((a, np.exp(-(d ** 2) / denom), s - 1))
        # Region index template: slices on group axes, per-deposit fixed
        # coordinates elsewhere.
        self._proto: list = []
        self._fill: list[tuple[int, int]] = []
        for j in range(spec.ndim):
            a = spec.ndim - 1 - j
            if a in group.axes:
                self._proto.append(slice(None))
            else:
                self._proto.append(0)
                self._fill.append((j, a))
        last = spec.ndim - 1
        self.has_block_axis = last in group.axes
        if self.has_block_axis:
            # Linear-index offsets of the cross section (group axes besides
            # the block axis), enumerated in the subarray's C order.
            cross_axes = [a for a in self.axes_desc if a != last]
            if cross_axes:
                grids = np.meshgrid(
                    *[np.arange(spec.sizes[a]) for a in cross_axes], indexing="ij"
                )
                lin = sum(g * spec.strides[a] for g, a in zip(grids, cross_axes))
                self.cross_lin = np.asarray(lin, dtype=np.int64).ravel()
            else:
                self.cross_lin = np.zeros(1, dtype=np.int64)
        self._kernel_fft: np.ndarray | None = None

    def shifted_kernel(self, p: Sequence[int]) -> np.ndarray:
        """Group kernel centered at p, axes matching the region subarray."""
        a0, t0, off0 = self._tables[0]
        k = t0[off0 - p[a0] : off0 - p[a0] + self.spec.sizes[a0]]
        if len(self._tables) == 1:
            return k
        a1, t1, off1 = self._tables[1]
        k = np.multiply.outer(k, t1[off1 - p[a1] : off1 - p[a1] + self.spec.sizes[a1]])
        for a, t, off in self._tables[2:]:
            k = np.multiply.outer(k, t[off - p[a] : off - p[a] + self.spec.sizes[a]])
        return k

    def region_index(self, p: Sequence[int]) -> tuple:
        """Numpy index tuple selecting the hyperplane this group deposits to."""
        idx = list(self._proto)
        for j, a in self._fill:
            idx[j] = p[a]
        return tuple(idx)

    def base_lin(self, p: Sequence[int]) -> int:
        return sum(p[a] * self.spec.strides[a] for a in self.other_axes)

    def numpy_axes(self) -> list[int]:
        return sorted(self.spec.numpy_axis(a) for a in self.group.axes)

    def kernel_fft(self) -> np.ndarray:
        """Spectrum of the zero-centered circular kernel over the group axes."""
        if self._kernel_fft is None:
            spec = self.spec
            k = np.ones([1] * spec.ndim)
            for a in self.group.axes:
                s = spec.sizes[a]
                d = np.arange(s)
                d = np.minimum(d, s - d).astype(np.float64)
                base = np.exp(-(d ** 2) / (2.0 * self.group.sigma ** 2))
                shape = [1] * spec.ndim
                shape[spec.numpy_axis(a)] = s
                k = k * base.reshape(shape)
            self._kernel_fft = np.fft.rfftn(k, axes=self.numpy_axes())
        return self._kernel_fft


def _masked_argmin(values: np.ndarray, exclude: np.ndarray) -> tuple[float, int]:
    m = np.where(exclude, np.inf, values)
    i = int(np.argmin(m))
    v = float(m[i])
    return (v, i) if np.isfinite(v) else (np.inf, -1)


def _masked_argmax(values: np.ndarray, include: np.ndarray) -> tuple[float, int]:
    m = np.where(include, values, -np.inf)
    i = int(np.argmax(m))
    v = float(m[i])
    return (v, i) if np.isfinite(v) else (-np.inf, -1)


class _SlabCache:
    """Per-slab extremum cache along the last axis.

    For each slab holds (value, linear index) of the min over OFF pixels and
    the max over ON pixels, or sentinel (+/-inf, -1) when the slab has none.
    Slabs are marked dirty when a deposit may have invalidated their cached
    entry and are rescanned lazily at query time.
    """

    def __init__(self, field: "EnergyField"):
        self.field = field
        n_slabs = field.spec.sizes[-1]
        self.n_slabs = n_slabs
        self.block_size = field.spec.pixel_count // n_slabs
        self.stride_t = field.spec.strides[-1]
        self.blocks = np.arange(n_slabs, dtype=np.int64) * self.stride_t
        self.void_val = np.full(n_slabs, np.inf)
        self.void_idx = np.full(n_slabs, -1, dtype=np.int64)
        self.clus_val = np.full(n_slabs, -np.inf)
        self.clus_idx = np.full(n_slabs, -1, dtype=np.int64)
        self.dirty = np.ones(n_slabs, dtype=bool)

    def rescan(self, b: int) -> None:
        lo = b * self.block_size
        hi = lo + self.block_size
        vals = self.field.values[lo:hi]
        on = self.field.on[lo:hi]
        v, i = _masked_argmin(vals, on)
        self.void_val[b], self.void_idx[b] = v, (lo + i if i >= 0 else -1)
        v, i = _masked_argmax(vals, on)
        self.clus_val[b], self.clus_idx[b] = v, (lo + i if i >= 0 else -1)
        self.dirty[b] = False

    def flush(self) -> None:
        if self.dirty.any():
            for b in np.nonzero(self.dirty)[0]:
                self.rescan(int(b))

    def _cached_in_region(self, idx: np.ndarray, geo: _GroupGeometry,
                          p: Sequence[int], base: int) -> np.ndarray:
        """Which cached indices lie on the hyperplane geo deposits to."""
        if geo.cross_lin.size == 1:
            # Region holds one pixel per slab: sub-slab offset must equal base.
            return (idx >= 0) & (idx % self.stride_t == base)
        spec = self.field.spec
        mask = idx >= 0
        for a in geo.other_axes:
            mask &= (idx // spec.strides[a]) % spec.sizes[a] == p[a]
        return mask

    def column_update(self, geo: _GroupGeometry, p: Sequence[int],
                      sign: int) -> None:
        """Vectorized cache update for a deposit region spanning all slabs."""
        field = self.field
        base = geo.base_lin(p)
        region = geo.region_index(p)
        single = geo.cross_lin.size == 1
        if single:
            cval_all = field.values_nd[region]
            con = field.on_nd[region]
            cidx = self.blocks + base
        else:
            v2 = field.values_nd[region].reshape(self.n_slabs, -1)
            o2 = field.on_nd[region].reshape(self.n_slabs, -1)

        if sign > 0:
            # Values rose: OFF minima can only be invalidated, ON maxima can
            # only improve (or need refreshing when the cached pixel rose).
            hit = self._cached_in_region(self.void_idx, geo, p, base)
            self.dirty |= hit
            hit = self._cached_in_region(self.clus_idx, geo, p, base)
            if hit.any():
                self.clus_val[hit] = field.values[self.clus_idx[hit]]
            if single:
                cval = np.where(con, cval_all, -np.inf)
            else:
                mv = np.where(o2, v2, -np.inf)
                ci = np.argmax(mv, axis=1)
                cval = mv[np.arange(self.n_slabs), ci]
                cidx = self.blocks + base + geo.cross_lin[ci]
            better = (cval > self.clus_val) | (
                (cval == self.clus_val) & (cidx < self.clus_idx)
            )
            better &= np.isfinite(cval)
            if better.any():
                self.clus_val[better] = cval[better]
                self.clus_idx[better] = cidx[better]
        else:
            hit = self._cached_in_region(self.clus_idx, geo, p, base)
            self.dirty |= hit
            hit = self._cached_in_region(self.void_idx, geo, p, base)
            if hit.any():
                self.void_val[hit] = field.values[self.void_idx[hit]]
            if single:
                cval = np.where(con, np.inf, cval_all)
            else:
                mv = np.where(o2, np.inf, v2)
                ci = np.argmin(mv, axis=1)
                cval = mv[np.arange(self.n_slabs), ci]
                cidx = self.blocks + base + geo.cross_lin[ci]
            better = (cval < self.void_val) | (
                (cval == self.void_val) & (cidx < self.void_idx)
            )
            better &= np.isfinite(cval)
            if better.any():
                self.void_val[better] = cval[better]
                self.void_idx[better] = cidx[better]

    def reduce_void(self) -> int:
        self.flush()
        best = self.void_val.min()
        if not np.isfinite(best):
            return -1
        return int(self.void_idx[self.void_val == best].min())

    def reduce_cluster(self) -> int:
        self.flush()
        best = self.clus_val.max()
        if not np.isfinite(best):
            return -1
        return int(self.clus_idx[self.clus_val == best].min())


class EnergyField:
    """Dense per-pixel energy with incremental deposit and extremum queries."""

    def __init__(self, spec: MaskSpec, workers: int = 1):
        self.spec = spec
        self.workers = max(1, int(workers))
        n = spec.pixel_count
        self.values = np.zeros(n, dtype=np.float64)
        self.on = np.zeros(n, dtype=bool)
        self.values_nd = self.values.reshape(spec.numpy_shape)
        self.on_nd = self.on.reshape(spec.numpy_shape)
        self._geos = [_GroupGeometry(g, spec) for g in spec.groups]
        multi = len(spec.groups) > 1 and spec.sizes[-1] > 1
        self._cache = _SlabCache(self) if multi else None

    @classmethod
    def from_bits(cls, spec: MaskSpec, bits: np.ndarray,
                  workers: int = 1) -> "EnergyField":
        """Build the field for a whole ON set at once."""
        field = cls(spec, workers)
        bits = np.asarray(bits).ravel().astype(bool)
        if bits.shape != (spec.pixel_count,):
            raise ValueError("bits length must equal the pixel count")
        field.on[:] = bits
        if not bits.any():
            return field
        bits_nd = field.on_nd.astype(np.float64)
        on_idx = None
        for geo in field._geos:
            if geo.all_toroidal:
                axes = geo.numpy_axes()
                sizes = [spec.numpy_shape[j] for j in axes]
                spectrum = np.fft.rfftn(bits_nd, axes=axes) * geo.kernel_fft()
                field.values_nd += np.fft.irfftn(spectrum, s=sizes, axes=axes)
            else:
                if on_idx is None:
                    on_idx = np.nonzero(bits)[0]
                for i in on_idx:
                    p = spec.delinearize(int(i))
                    field.values_nd[geo.region_index(p)] += geo.shifted_kernel(p)
        return field

    @property
    def count_on(self) -> int:
        return int(self.on.sum())

    # -- deposit ----------------------------------------------------------------

    def deposit(self, p: Sequence[int], sign: int) -> None:
        self.deposit_index(self.spec.linearize(p), sign)

    def deposit_index(self, i: int, sign: int) -> None:
        if sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {sign}")
        if (sign > 0) == bool(self.on[i]):
            state = "ON" if self.on[i] else "OFF"
            raise ValueError(f"deposit(sign={sign:+d}) on {state} pixel {i}")
        self.on[i] = sign > 0
        p = self.spec.delinearize(i)
        cache = self._cache
        for geo in self._geos:
            k = geo.shifted_kernel(p)
            if sign < 0:
                k = -k
            self.values_nd[geo.region_index(p)] += k
            if cache is not None:
                if geo.has_block_axis:
                    cache.column_update(geo, p, sign)
                else:
                    cache.dirty[p[-1]] = True

    # -- extremum queries ---------------------------------------------------------

    def largest_void_index(self) -> int:
        """OFF pixel with minimal energy; smallest linear index on ties."""
        if self._cache is not None:
            i = self._cache.reduce_void()
        else:
            _, i = self._full_scan(void=True)
        if i < 0:
            raise ValueError("no OFF pixels: field is fully on")
        return i

    def tightest_cluster_index(self) -> int:
        """ON pixel with maximal energy; smallest linear index on ties."""
        if self._cache is not None:
            i = self._cache.reduce_cluster()
        else:
            _, i = self._full_scan(void=False)
        if i < 0:
            raise ValueError("no ON pixels: field is empty")
        return i

    def largest_void(self) -> tuple[int, ...]:
        return self.spec.delinearize(self.largest_void_index())

    def tightest_cluster(self) -> tuple[int, ...]:
        return self.spec.delinearize(self.tightest_cluster_index())

    def _full_scan(self, void: bool) -> tuple[float, int]:
        n = self.spec.pixel_count
        if self.workers > 1 and n >= PARALLEL_SCAN_MIN_PIXELS:
            return self._chunked_scan(void)
        if void:
            return _masked_argmin(self.values, self.on)
        return _masked_argmax(self.values, self.on)

    def _chunked_scan(self, void: bool) -> tuple[float, int]:
        from concurrent.futures import ThreadPoolExecutor

        n = self.spec.pixel_count
        bounds = np.linspace(0, n, self.workers + 1, dtype=np.int64)

        def scan(k: int) -> tuple[float, int]:
            lo, hi = int(bounds[k]), int(bounds[k + 1])
            if void:
                v, i = _masked_argmin(self.values[lo:hi], self.on[lo:hi])
            else:
                v, i = _masked_argmax(self.values[lo:hi], self.on[lo:hi])
            return (v, lo + i if i >= 0 else -1)

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            parts = list(pool.map(scan, range(self.workers)))
        # Chunks are in index order, so the first winner keeps the smallest
        # linear index on exact ties.
        best_v, best_i = parts[0]
        for v, i in parts[1:]:
            if i < 0:
                continue
            if best_i < 0 or (v < best_v if void else v > best_v):
                best_v, best_i = v, i
        return best_v, best_i
