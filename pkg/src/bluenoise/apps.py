"""Application drivers: dithering, stochastic transparency, single scattering.

These are deliberately small, CPU-friendly renderers that consume one noise
value per pixel per frame (three for RGB dithering, via R2-shifted reads of
the same slice) and accumulate frames by running mean or exponential moving
average against an analytic ground truth.

The volume scene is procedural: a seeded sum of Gaussian density bumps
inside the unit cube, lit by a directional light. Rays march at n evenly
spaced points; a collision happens at the first sample where the
accumulated optical depth reaches -ln(1 - xi), after which a shadow march
toward the light estimates transmittance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .noise_zoo import r2_offsets


# ---------------------------------------------------------------------------
# dithering and stochastic transparency

def dither_kbit(image: np.ndarray, noise: np.ndarray, k: int) -> np.ndarray:
    """Quantize to k bits after adding noise: floor(v * L + n) / L, L = 2^k - 1.

    With uniform noise the expected output equals the input, so banding
    turns into zero-mean noise.
    """
    image = np.asarray(image, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if image.shape != noise.shape:
        raise ValueError(f"shape mismatch: {image.shape} vs {noise.shape}")
    if not 1 <= k <= 8:
        raise ValueError(f"bit depth must be in 1..8, got {k}")
    levels = (1 << k) - 1
    return np.clip(np.floor(image * levels + noise), 0, levels) / levels


def decorrelated_reads(noise2d: np.ndarray, count: int) -> list[np.ndarray]:
    """count shifted views of one mask slice, offset along the R2 lattice.

    Blue noise decorrelates over short distances, so widely separated reads
    of one texture act like independent noise sources. Read 0 is unshifted.
    """
    noise2d = np.asarray(noise2d)
    if noise2d.ndim != 2:
        raise ValueError("decorrelated reads want a 2D mask slice")
    h, w = noise2d.shape
    offs = r2_offsets(count)
    out = []
    for u, v in offs:
        out.append(np.roll(noise2d, (int(v * h), int(u * w)), axis=(0, 1)))
    return out


def dither_rgb(image: np.ndarray, noise2d: np.ndarray, k: int) -> np.ndarray:
    """Dither an (H, W, 3) image using three R2-shifted reads of one slice."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError("expected an (H, W, 3) image")
    reads = decorrelated_reads(noise2d, 3)
    return np.stack(
        [dither_kbit(image[..., c], reads[c], k) for c in range(3)], axis=-1
    )


def stochastic_alpha(alpha, noise) -> np.ndarray:
    """Accept a sample where noise < alpha (coverage test)."""
    return np.asarray(noise, dtype=np.float64) < np.asarray(alpha, dtype=np.float64)


# ---------------------------------------------------------------------------
# procedural volume

@dataclass
class VolumeScene:
    """Heterogeneous density in the unit cube with one directional light.

    density(x) = base + sum_i amp_i * exp(-|x - c_i|^2 / (2 r_i^2)), always
    nonnegative. extinction scales density to optical depth per unit length.
    """

    centers: np.ndarray
    radii: np.ndarray
    amplitudes: np.ndarray
    base: float = 0.0
    albedo: float = 0.8
    extinction: float = 8.0
    light_dir: np.ndarray = field(
        default_factory=lambda: np.array([0.0, 1.0, 0.0])
    )
    light_intensity: float = 1.0
    background: float = 0.0

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=np.float64))
        if self.centers.size == 0:
            self.centers = self.centers.reshape(0, 3)
        self.radii = np.atleast_1d(np.asarray(self.radii, dtype=np.float64))
        self.amplitudes = np.atleast_1d(
            np.asarray(self.amplitudes, dtype=np.float64)
        )
        ld = np.asarray(self.light_dir, dtype=np.float64)
        self.light_dir = ld / np.linalg.norm(ld)
        if self.base < 0 or (self.amplitudes < 0).any():
            raise ValueError("density must be nonnegative everywhere")

    @classmethod
    def random_bumps(cls, seed: int, **kwargs) -> "VolumeScene":
        """3 to 5 seeded Gaussian bumps, centered away from the cube faces."""
        rng = np.random.Generator(np.random.PCG64(seed))
        count = int(rng.integers(3, 6))
        return cls(
            centers=rng.uniform(0.25, 0.75, size=(count, 3)),
            radii=rng.uniform(0.08, 0.22, size=count),
            amplitudes=rng.uniform(0.5, 1.5, size=count),
            **kwargs,
        )

    @classmethod
    def homogeneous(cls, density: float, **kwargs) -> "VolumeScene":
        return cls(
            centers=np.empty((0, 3)), radii=np.empty(0),
            amplitudes=np.empty(0), base=density, **kwargs,
        )

    def density(self, points: np.ndarray) -> np.ndarray:
        """Density at (..., 3) points."""
        points = np.asarray(points, dtype=np.float64)
        out = np.full(points.shape[:-1], self.base)
        for c, r, a in zip(self.centers, self.radii, self.amplitudes):
            d2 = ((points - c) ** 2).sum(axis=-1)
            out += a * np.exp(-d2 / (2.0 * r * r))
        return out


def _cube_exit(origin: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Distance to leave the unit cube from inside, along direction."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t_lo = (0.0 - origin) / direction
        t_hi = (1.0 - origin) / direction
    t_far = np.where(direction != 0.0, np.maximum(t_lo, t_hi), np.inf)
    return np.clip(t_far.min(axis=-1), 0.0, None)


def free_flight_batch(
    scene: VolumeScene, origins: np.ndarray, directions: np.ndarray,
    t_min, t_max, steps: int, xi: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized free-flight march over a batch of rays.

    Returns (hit, index, distance): hit is False where the ray exits without
    reaching its optical-depth threshold, in which case index is -1.
    """
    origins = np.atleast_2d(np.asarray(origins, dtype=np.float64))
    directions = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    if (xi >= 1.0).any() or (xi < 0.0).any():
        raise ValueError("xi must lie in [0, 1)")
    n_rays = origins.shape[0]
    t_min = np.broadcast_to(np.asarray(t_min, dtype=np.float64), (n_rays,))
    t_max = np.broadcast_to(np.asarray(t_max, dtype=np.float64), (n_rays,))
    if (t_max <= t_min).any():
        raise ValueError("t_max must exceed t_min")
    if steps < 1:
        raise ValueError("need at least one march step")
    threshold = -np.log1p(-xi)
    dt = (t_max - t_min) / steps
    acc = np.zeros(n_rays)
    hit = np.zeros(n_rays, dtype=bool)
    index = np.full(n_rays, -1, dtype=np.int64)
    dist = np.full(n_rays, np.inf)
    for s in range(steps):
        t = t_min + s * dt
        pos = origins + t[:, None] * directions
        acc = acc + scene.density(pos) * dt * scene.extinction
        # A zero threshold collides at the first sample with actual density.
        newly = ~hit & (acc >= threshold) & (acc > 0.0)
        if newly.any():
            index[newly] = s
            dist[newly] = t[newly]
            hit |= newly
            if hit.all():
                break
    return hit, index, dist


def free_flight(
    scene: VolumeScene, origin: Sequence[float], direction: Sequence[float],
    t_min: float, t_max: float, steps: int, xi: float,
) -> Optional[tuple[int, np.ndarray]]:
    """Single-ray free flight: (sample index, position) or None on escape."""
    hit, index, dist = free_flight_batch(
        scene, [origin], [direction], t_min, t_max, steps, [xi]
    )
    if not hit[0]:
        return None
    pos = np.asarray(origin, dtype=np.float64) + dist[0] * np.asarray(
        direction, dtype=np.float64
    )
    return int(index[0]), pos


def _transmittance(scene: VolumeScene, points: np.ndarray,
                   shadow_steps: int) -> np.ndarray:
    """exp(-optical depth) along the light direction to the cube boundary."""
    d = scene.light_dir
    t_exit = _cube_exit(points, d)
    dl = t_exit / shadow_steps
    depth = np.zeros(points.shape[0])
    for s in range(shadow_steps):
        pos = points + ((s + 0.5) * dl)[:, None] * d
        depth += scene.density(pos) * dl * scene.extinction
    return np.exp(-depth)


def single_scatter_batch(
    scene: VolumeScene, origins: np.ndarray, directions: np.ndarray,
    xi: np.ndarray, steps: int = 64, shadow_steps: int = 32,
) -> np.ndarray:
    """Radiance per ray: light * transmittance * albedo at the collision."""
    origins = np.atleast_2d(np.asarray(origins, dtype=np.float64))
    directions = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    t_max = _cube_exit(origins, directions)
    empty = t_max <= 0.0
    t_max = np.where(empty, 1.0, t_max)
    hit, _, dist = free_flight_batch(
        scene, origins, directions, 0.0, t_max, steps, xi
    )
    hit &= ~empty
    out = np.full(origins.shape[0], scene.background)
    if hit.any():
        pts = origins[hit] + dist[hit, None] * directions[hit]
        trans = _transmittance(scene, pts, shadow_steps)
        out[hit] = scene.light_intensity * trans * scene.albedo
    return out


def single_scatter_pixel(
    scene: VolumeScene, origin: Sequence[float], direction: Sequence[float],
    xi: float, steps: int = 64, shadow_steps: int = 32,
) -> float:
    return float(
        single_scatter_batch(scene, [origin], [direction], [xi], steps,
                             shadow_steps)[0]
    )


def render_scatter_frame(
    scene: VolumeScene, noise2d: np.ndarray, steps: int = 64,
    shadow_steps: int = 32,
) -> np.ndarray:
    """Orthographic single-scatter render through the unit cube.

    Pixel (i, j) shoots a +z ray from ((j+.5)/W, (i+.5)/H, 0) using the
    noise value at that pixel as its free-flight draw.
    """
    noise2d = np.asarray(noise2d, dtype=np.float64)
    h, w = noise2d.shape
    jj, ii = np.meshgrid(np.arange(w), np.arange(h))
    origins = np.stack(
        [(jj.ravel() + 0.5) / w, (ii.ravel() + 0.5) / h, np.zeros(h * w)],
        axis=1,
    )
    directions = np.broadcast_to([0.0, 0.0, 1.0], (h * w, 3))
    vals = single_scatter_batch(
        scene, origins, directions, noise2d.ravel(), steps, shadow_steps
    )
    return vals.reshape(h, w)


def reference_scatter_image(
    scene: VolumeScene, shape: tuple[int, int], samples: int = 256,
    steps: int = 64, shadow_steps: int = 32,
) -> np.ndarray:
    """Ground-truth image: per-pixel mean over stratified free-flight draws."""
    h, w = shape
    acc = np.zeros((h, w))
    for k in range(samples):
        xi = np.full((h, w), (k + 0.5) / samples)
        acc += render_scatter_frame(scene, xi, steps, shadow_steps)
    return acc / samples


# ---------------------------------------------------------------------------
# accumulation

@dataclass
class FrameStack:
    """Frames plus ground truth and an accumulation mode ("mc" or "ema")."""

    frames: np.ndarray
    truth: np.ndarray
    mode: str = "mc"
    alpha: float = 0.1

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        self.truth = np.asarray(self.truth, dtype=np.float64)
        if self.frames.ndim < 2 or self.frames.shape[0] < 1:
            raise ValueError("need at least one frame")
        if self.frames.shape[1:] != self.truth.shape:
            raise ValueError("frames and truth shapes disagree")
        if self.mode not in ("mc", "ema"):
            raise ValueError(f"unknown accumulation mode {self.mode!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")


def accumulate(stack: FrameStack) -> tuple[np.ndarray, np.ndarray]:
    """Blend frames in order; returns (final image, per-frame RMSE)."""
    rmse = np.empty(stack.frames.shape[0])
    acc = stack.frames[0].astype(np.float64).copy()
    for k, frame in enumerate(stack.frames):
        if k:
            if stack.mode == "mc":
                acc += (frame - acc) / (k + 1)
            else:
                acc = (1.0 - stack.alpha) * acc + stack.alpha * frame
        rmse[k] = math.sqrt(((acc - stack.truth) ** 2).mean())
    return acc, rmse
