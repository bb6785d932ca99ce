"""Spectral and convergence measurement.

Spectra are magnitude DFTs of mean-subtracted data, normalized by
sqrt(sample count) so that Parseval holds exactly: the sum of squared
magnitudes equals the sum of squared mean-subtracted values. Plane spectra
average the 2D transform over every slice along the remaining axes and
report the result DC-centered.

The convergence harness integrates a library of 1D functions over [0, 1)
from per-pixel value streams, under plain Monte Carlo averaging or an
exponential moving average, and reports the mean absolute error and RMSE
across pixels per frame.

Frequency band convention: Nyquist is half the smaller plane extent, in
cycles per full extent. The low band is radius < Nyquist/4, the high band
is radius in [Nyquist/2, Nyquist]; their mean-magnitude ratio quantifies
the low-frequency deficit (lower = bluer). DC is excluded everywhere.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .generator import Mask
from .grid import axis_label
from .noise_zoo import NoiseCube


# ---------------------------------------------------------------------------
# report types

@dataclass
class SpectrumImage:
    """DC-centered magnitude spectrum averaged over plane slices."""

    magnitudes: np.ndarray
    plane: tuple[int, int]
    averaged: int

    @property
    def label(self) -> str:
        return "".join(axis_label(a) for a in self.plane).upper()


@dataclass
class RadialProfile:
    """Mean magnitude per frequency annulus (or per 1D frequency bin)."""

    centers: np.ndarray
    means: np.ndarray
    counts: np.ndarray


@dataclass
class ConvergenceReport:
    """Per-frame integration error across a population of pixel streams."""

    errors: np.ndarray          # mean |estimate - truth| per frame
    rmse: np.ndarray            # root mean squared error per frame
    integrand: str
    scheme: str                 # "mc" or "ema(alpha)"
    provenance: str
    frames: int = field(init=False)

    def __post_init__(self):
        self.frames = len(self.errors)


# ---------------------------------------------------------------------------
# spectra

def _as_cube(data) -> np.ndarray:
    if isinstance(data, NoiseCube):
        return np.asarray(data.values, dtype=np.float64)
    if isinstance(data, Mask):
        return data.payload_nd().astype(np.float64)
    return np.asarray(data, dtype=np.float64)


def dft_plane_averaged(data, plane: tuple[int, int] = (0, 1)) -> SpectrumImage:
    """Average the 2D magnitude DFT of every slice spanning the given plane.

    plane names two distinct spec axes (0 = x). Each slice is mean-subtracted
    before the transform, so DC is exactly zero. Output rows run along
    plane[1], columns along plane[0], DC shifted to the center.
    """
    cube = _as_cube(data)
    ndim = cube.ndim
    a0, a1 = plane
    if a0 == a1 or not (0 <= a0 < ndim and 0 <= a1 < ndim):
        raise ValueError(f"bad plane {plane} for {ndim}D data")
    # numpy axis of spec axis a is ndim-1-a; rows = plane[1], cols = plane[0]
    moved = np.moveaxis(cube, (ndim - 1 - a1, ndim - 1 - a0), (-2, -1))
    slices = moved.reshape(-1, moved.shape[-2], moved.shape[-1])
    acc = np.zeros(slices.shape[1:], dtype=np.float64)
    norm = math.sqrt(slices.shape[1] * slices.shape[2])
    for sl in slices:
        a = sl - sl.mean()
        acc += np.abs(np.fft.fft2(a)) / norm
    acc /= len(slices)
    return SpectrumImage(np.fft.fftshift(acc), (a0, a1), len(slices))


def _freq_radii(shape: tuple[int, int]) -> np.ndarray:
    ny, nx = shape
    fy = np.arange(ny) - ny // 2
    fx = np.arange(nx) - nx // 2
    return np.hypot(*np.meshgrid(fy, fx, indexing="ij"))


def radial_profile(spectrum: SpectrumImage, bins: int = 16) -> RadialProfile:
    """Annular means of a spectrum by frequency radius, DC excluded.

    Equal-width annuli over (0, Nyquist]; pixels beyond Nyquist (the
    corners) are not counted.
    """
    if bins < 4:
        raise ValueError("need at least 4 radial bins")
    mags = spectrum.magnitudes
    r = _freq_radii(mags.shape)
    nyq = min(mags.shape) / 2.0
    sel = (r > 0) & (r <= nyq)
    idx = np.minimum((r[sel] / nyq * bins).astype(np.int64), bins - 1)
    sums = np.bincount(idx, weights=mags[sel], minlength=bins)
    counts = np.bincount(idx, minlength=bins)
    means = np.divide(sums, counts, out=np.zeros(bins), where=counts > 0)
    centers = (np.arange(bins) + 0.5) * nyq / bins
    return RadialProfile(centers, means, counts)


def low_freq_ratio(spectrum: SpectrumImage) -> float:
    """Mean magnitude below Nyquist/4 over mean magnitude in [Nyquist/2, Nyquist].

    1.0 for a flat spectrum; near zero for a spectrum with an empty
    low-frequency disc.
    """
    mags = spectrum.magnitudes
    r = _freq_radii(mags.shape)
    nyq = min(mags.shape) / 2.0
    low = mags[(r > 0) & (r < nyq / 4)]
    high = mags[(r >= nyq / 2) & (r <= nyq)]
    if low.size == 0 or high.size == 0:
        raise ValueError(f"spectrum {mags.shape} too small for band ratio")
    return float(low.mean() / high.mean())


def temporal_spectrum(data) -> RadialProfile:
    """Mean 1D magnitude spectrum of per-pixel sequences along time (axis 0).

    Each pixel column is mean-subtracted first; the profile covers
    frequencies 1..T//2 in cycles per sequence length.
    """
    cube = _as_cube(data)
    t = cube.shape[0]
    if t < 8:
        raise ValueError(f"time extent {t} too short, need >= 8")
    cols = cube.reshape(t, -1)
    cols = cols - cols.mean(axis=0)
    mags = np.abs(np.fft.rfft(cols, axis=0)) / math.sqrt(t)
    mean = mags.mean(axis=1)[1 : t // 2 + 1]
    centers = np.arange(1, t // 2 + 1, dtype=np.float64)
    return RadialProfile(centers, mean, np.ones_like(centers, dtype=np.int64))


def temporal_flatness(profile: RadialProfile) -> float:
    """Lowest-quartile mean over highest-quartile mean of a 1D profile."""
    n = len(profile.means)
    q = max(n // 4, 1)
    return float(profile.means[:q].mean() / profile.means[-q:].mean())


def autocorrelation(mask2d) -> np.ndarray:
    """Normalized circular autocorrelation of a 2D mask, 1.0 at zero lag.

    Computed on mean-subtracted values; result is lag-indexed (lag (0,0)
    at [0, 0], wrapping toroidally).
    """
    vals = _as_cube(mask2d)
    if vals.ndim != 2:
        raise ValueError("autocorrelation expects a 2D mask")
    a = vals - vals.mean()
    power = (a * a).sum()
    if power == 0.0:
        out = np.zeros_like(a)
        out[0, 0] = 1.0
        return out
    f = np.fft.fft2(a)
    return np.fft.ifft2(f * np.conj(f)).real / power


# ---------------------------------------------------------------------------
# integrand library

def _smoothstep(x):
    return 3.0 * x ** 2 - 2.0 * x ** 3

_BUMP_SIGMA = 0.15

def _gauss_bump(x):
    return np.exp(-((x - 0.5) ** 2) / (2.0 * _BUMP_SIGMA ** 2))

# Analytic integral of the bump over [0, 1].
_BUMP_TRUTH = _BUMP_SIGMA * math.sqrt(2.0 * math.pi) * math.erf(
    0.5 / (_BUMP_SIGMA * math.sqrt(2.0))
)

INTEGRANDS: dict[str, tuple[Callable[[np.ndarray], np.ndarray], float]] = {
    "constant": (lambda x: np.ones_like(x), 1.0),
    "linear": (lambda x: x, 0.5),
    "sine": (lambda x: np.sin(np.pi * x), 2.0 / math.pi),
    "smoothstep": (_smoothstep, 0.5),
    "step_third": (lambda x: (x >= 1.0 / 3.0).astype(np.float64), 2.0 / 3.0),
    "gauss_bump": (_gauss_bump, _BUMP_TRUTH),
}


def integrand(name: str) -> tuple[Callable[[np.ndarray], np.ndarray], float]:
    """Look up a 1D test integrand and its integral over [0, 1)."""
    try:
        return INTEGRANDS[name]
    except KeyError:
        raise ValueError(
            f"unknown integrand {name!r}; have {sorted(INTEGRANDS)}"
        ) from None


# ---------------------------------------------------------------------------
# convergence harness

def _as_streams(sequence, frames: Optional[int]) -> np.ndarray:
    """Normalize input to (n_streams, frames)."""
    arr = _as_cube(sequence)
    if arr.ndim == 1:
        arr = arr[None, :]
    elif arr.ndim > 2:
        arr = arr.reshape(arr.shape[0], -1).T  # time axis 0 -> columns
    if frames is not None:
        if frames > arr.shape[1]:
            raise ValueError(
                f"requested {frames} frames but streams have {arr.shape[1]}"
            )
        arr = arr[:, :frames]
    return arr


def mc_error_series(sequence, integrand_name: str,
                    frames: Optional[int] = None,
                    provenance: str = "") -> ConvergenceReport:
    """Running-mean integration error per frame, averaged over streams."""
    streams = _as_streams(sequence, frames)
    f, truth = integrand(integrand_name)
    fx = f(streams)
    est = np.cumsum(fx, axis=1) / np.arange(1, fx.shape[1] + 1)
    err = np.abs(est - truth)
    return ConvergenceReport(
        errors=err.mean(axis=0),
        rmse=np.sqrt((err ** 2).mean(axis=0)),
        integrand=integrand_name,
        scheme="mc",
        provenance=provenance,
    )


def ema_error_series(sequence, integrand_name: str, alpha: float = 0.1,
                     frames: Optional[int] = None,
                     provenance: str = "") -> ConvergenceReport:
    """Exponential-moving-average error per frame: y = (1-a) y + a f(x)."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    streams = _as_streams(sequence, frames)
    f, truth = integrand(integrand_name)
    fx = f(streams)
    n = fx.shape[1]
    mae = np.empty(n)
    rmse = np.empty(n)
    y = fx[:, 0].copy()
    for k in range(n):
        if k:
            y *= 1.0 - alpha
            y += alpha * fx[:, k]
        e = np.abs(y - truth)
        mae[k] = e.mean()
        rmse[k] = math.sqrt((e ** 2).mean())
    return ConvergenceReport(
        errors=mae,
        rmse=rmse,
        integrand=integrand_name,
        scheme=f"ema({alpha:g})",
        provenance=provenance,
    )


# ---------------------------------------------------------------------------
# report output

def write_spectrum_pgm(spectrum: SpectrumImage, path) -> None:
    """16-bit PGM of the spectrum, normalized to its 99th percentile."""
    from .images import write_pgm

    mags = spectrum.magnitudes
    scale = np.percentile(mags, 99.0)
    if scale <= 0:
        scale = 1.0
    write_pgm(np.clip(mags / scale, 0.0, 1.0), path, maxval=65535)


def write_spectrum_csv(spectrum: SpectrumImage, path) -> None:
    """Summary row: plane, slices averaged, low-frequency band ratio."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["plane", "slices_averaged", "low_freq_ratio"])
        w.writerow([spectrum.label, spectrum.averaged,
                    f"{low_freq_ratio(spectrum):.6g}"])


def write_radial_csv(profile: RadialProfile, path) -> None:
    """Rows: bin_center_cycles, mean_magnitude, pixel_count."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_center_cycles", "mean_magnitude", "pixel_count"])
        for c, m, n in zip(profile.centers, profile.means, profile.counts):
            w.writerow([f"{c:.6g}", f"{m:.6g}", int(n)])


def write_convergence_csv(report: ConvergenceReport, path) -> None:
    """Rows: frame, mean_abs_error, rmse (header carries the metadata)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame", "mean_abs_error", "rmse"])
        for k, (e, r) in enumerate(zip(report.errors, report.rmse)):
            w.writerow([k, f"{e:.8g}", f"{r:.8g}"])
