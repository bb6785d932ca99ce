"""Independent brute-force implementations used as test oracles.

Everything here recomputes from definitions: pair energies via direct
loops and fields as full O(N^2) sums. The replay verifier walks a finished
rank mask step by step, rebuilding the field from scratch after every
toggle, and checks that each selected pixel is the scan extremum with the
smallest-index tie-break. Selections are allowed to differ from the strict
scan winner only when the brute-force energies tie to within TIE_EPS, since
summation order legitimately reorders exactly-tied float values.

Slow by design; only run on tiny grids. Nothing here shares computation
paths with the package beyond the MaskSpec type and the seeded initial
pattern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from bluenoise.generator import initial_pattern
from bluenoise.grid import MaskSpec

TIE_EPS = 1e-9


def pair_energy_direct(p, q, spec: MaskSpec) -> float:
    total = 0.0
    for g in spec.groups:
        outside = [a for a in range(spec.ndim) if a not in g.axes]
        if any(p[a] != q[a] for a in outside):
            continue
        dsq = 0.0
        for a, tor in zip(g.axes, g.toroidal):
            d = abs(p[a] - q[a])
            if tor:
                d = min(d, spec.sizes[a] - d)
            dsq += d * d
        total += math.exp(-dsq / (2.0 * g.sigma * g.sigma))
    return total


def energy_matrix(spec: MaskSpec) -> np.ndarray:
    """Full N x N pair-energy table, direct evaluation."""
    n = spec.pixel_count
    coords = [spec.delinearize(i) for i in range(n)]
    e = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            e[i, j] = pair_energy_direct(coords[i], coords[j], spec)
    return e


def field_direct(spec: MaskSpec, on: np.ndarray,
                 ematrix: np.ndarray | None = None) -> np.ndarray:
    """Field values as the plain sum over ON pixels."""
    if ematrix is None:
        ematrix = energy_matrix(spec)
    return ematrix.T @ on.astype(np.float64)


def argmax_on(field: np.ndarray, on: np.ndarray) -> int:
    """Max over ON pixels, smallest index on ties."""
    best = -1
    for i in range(len(field)):
        if on[i] and (best < 0 or field[i] > field[best]):
            best = i
    return best


def argmin_off(field: np.ndarray, on: np.ndarray) -> int:
    best = -1
    for i in range(len(field)):
        if not on[i] and (best < 0 or field[i] < field[best]):
            best = i
    return best


@dataclass
class ReplayStats:
    steps: int = 0
    exact_matches: int = 0
    tie_steps: int = 0
    phases: list = field(default_factory=list)


class ReplayVerifier:
    """Re-derives every phase selection of a finished rank mask.

    The rank array fixes the order in which the generator toggled pixels in
    each phase. This verifier replays that order against from-scratch field
    sums: at every step the generator's pixel must hold the extremum energy
    (within TIE_EPS), and whenever the extremum is unique at that tolerance
    the pixel must be exactly the smallest-index scan winner.
    """

    def __init__(self, spec: MaskSpec):
        self.spec = spec
        self.e = energy_matrix(spec)
        self.stats = ReplayStats()

    def _check(self, on: np.ndarray, sel: int, want_max: bool, phase: str) -> None:
        f = field_direct(self.spec, on, self.e)
        if want_max:
            winner = argmax_on(f, on)
            assert on[sel], f"{phase}: selected pixel {sel} is not ON"
        else:
            winner = argmin_off(f, on)
            assert not on[sel], f"{phase}: selected pixel {sel} is not OFF"
        gap = abs(f[sel] - f[winner])
        assert gap <= TIE_EPS, (
            f"{phase}: pixel {sel} off the brute-force extremum by {gap:.3e}"
        )
        self.stats.steps += 1
        if sel == winner:
            self.stats.exact_matches += 1
        else:
            # Divergence is only legitimate at an exact scan tie.
            self.stats.tie_steps += 1

    def verify_redistributed(self, bits: np.ndarray) -> None:
        """Fixed point: the removed tightest cluster is itself a largest void."""
        on = bits.copy()
        if not on.any():
            return
        f = field_direct(self.spec, on, self.e)
        ci = argmax_on(f, on)
        on[ci] = False
        f2 = field_direct(self.spec, on, self.e)
        vi = argmin_off(f2, on)
        assert f2[ci] <= f2[vi] + TIE_EPS, (
            f"redistributed pattern is not settled: void {vi} beats removed "
            f"cluster {ci} by {f2[ci] - f2[vi]:.3e}"
        )

    def verify_phases(self, ranks: np.ndarray, redistributed: np.ndarray,
                      count_on: int) -> ReplayStats:
        spec = self.spec
        n = spec.pixel_count
        pixel_of_rank = np.empty(n, dtype=np.int64)
        pixel_of_rank[ranks] = np.arange(n)
        on = redistributed.copy()
        for r in range(count_on - 1, -1, -1):
            sel = int(pixel_of_rank[r])
            self._check(on, sel, want_max=True, phase="phase1")
            on[sel] = False
        assert not on.any()
        on = redistributed.copy()
        for r in range(count_on, n // 2):
            sel = int(pixel_of_rank[r])
            self._check(on, sel, want_max=False, phase="phase2")
            on[sel] = True
        on = ~on
        for r in range(n // 2, n):
            sel = int(pixel_of_rank[r])
            self._check(on, sel, want_max=True, phase="phase3")
            on[sel] = False
        assert not on.any()
        return self.stats


def verify_pipeline(spec: MaskSpec, ranks: np.ndarray) -> ReplayStats:
    """Full oracle pass for a generated mask: redistribution fixed point,
    then every ordering step, against from-scratch brute force."""
    from bluenoise.generator import redistribute

    pattern = initial_pattern(spec)
    spread = redistribute(pattern, spec)
    v = ReplayVerifier(spec)
    v.verify_redistributed(spread.bits)
    return v.verify_phases(ranks, spread.bits, spread.count_on)


def simpson_integral(f, a: float = 0.0, b: float = 1.0,
                     panels: int = 1_000_000) -> float:
    """Composite Simpson quadrature with the given (even) panel count."""
    if panels % 2:
        panels += 1
    x = np.linspace(a, b, panels + 1)
    y = f(x)
    h = (b - a) / panels
    return float(h / 3.0 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum()))
