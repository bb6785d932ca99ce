"""Blue noise masks over grouped axes: generation, analysis, and drivers."""

from .grid import AxisGroup, MaskSpec, group_distance_sq, toroidal_delta_sq
from .energy import EnergyField, pair_energy
from .generator import (
    BinaryPattern,
    ConvergenceError,
    Mask,
    RankMask,
    finalize,
    generate,
    initial_pattern,
    redistribute,
)
from .noise_zoo import (
    NoiseCube,
    golden_ratio_animate,
    hb_retarget,
    independent_2d_stack,
    r2_offsets,
    white_cube,
)
from .analysis import (
    ConvergenceReport,
    RadialProfile,
    SpectrumImage,
    autocorrelation,
    dft_plane_averaged,
    ema_error_series,
    integrand,
    low_freq_ratio,
    mc_error_series,
    radial_profile,
    temporal_spectrum,
)
from .pointset import (
    CoverageReport,
    PointSet,
    coverage_stats,
    select_samples,
    threshold_points,
)
from .container import ContainerError, decode_mask, encode_mask

__version__ = "0.1.0"

__all__ = [
    "AxisGroup",
    "BinaryPattern",
    "ContainerError",
    "ConvergenceError",
    "ConvergenceReport",
    "CoverageReport",
    "EnergyField",
    "Mask",
    "MaskSpec",
    "NoiseCube",
    "PointSet",
    "RadialProfile",
    "RankMask",
    "SpectrumImage",
    "autocorrelation",
    "coverage_stats",
    "decode_mask",
    "dft_plane_averaged",
    "ema_error_series",
    "encode_mask",
    "finalize",
    "generate",
    "golden_ratio_animate",
    "group_distance_sq",
    "hb_retarget",
    "independent_2d_stack",
    "initial_pattern",
    "integrand",
    "low_freq_ratio",
    "mc_error_series",
    "pair_energy",
    "r2_offsets",
    "radial_profile",
    "redistribute",
    "select_samples",
    "temporal_spectrum",
    "threshold_points",
    "toroidal_delta_sq",
    "white_cube",
    "__version__",
]
