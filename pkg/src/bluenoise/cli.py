"""Command-line front end.

Subcommands: gen, analyze, threshold, bench, dither, alpha, volume. Every
run is reproducible from its flags plus seeds; failures print a single
machine-parsable "error: ..." line on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, apps, container, noise_zoo, pointset
from .generator import ConvergenceError, Mask, RankMask, finalize, generate
from .grid import AxisGroup, MaskSpec, parse_groups, parse_sizes
from .images import read_image, write_pgm, write_ppm

PROGRESS_AUTO_PIXELS = 1 << 18


def _progress_printer(phase: str, done: int, total: int) -> None:
    print(f"progress phase={phase} placed={done} total={total}",
          file=sys.stderr, flush=True)


def _mask_values_nd(obj) -> np.ndarray:
    """Scalar values in [0, 1) from any decoded container payload."""
    if isinstance(obj, RankMask):
        return finalize(obj).payload_nd().astype(np.float64)
    if obj.bit_depth is None:
        return obj.payload_nd().astype(np.float64)
    levels = 1 << obj.bit_depth
    return (obj.payload_nd().astype(np.float64) + 0.5) / levels


def _load_noise(path) -> np.ndarray:
    return _mask_values_nd(container.decode_mask(path))


def _frame_slices(cube: np.ndarray, frames: int, offset: int = 0) -> np.ndarray:
    """frames slices from a (T, ...) cube, tiling toroidally along time."""
    if cube.ndim == 2:
        cube = cube[None, ...]
    t = cube.shape[0]
    return cube[(np.arange(frames) + offset) % t]


# ---------------------------------------------------------------------------
# gen

def _build_spec(args) -> MaskSpec:
    sizes = parse_sizes(args.size)
    ndim = len(sizes)
    if args.groups:
        axis_sets = parse_groups(args.groups, ndim)
    else:
        axis_sets = (tuple(range(ndim)),)
    sigmas = [float(s) for s in str(args.sigma).split(",")]
    if len(sigmas) == 1:
        sigmas *= len(axis_sets)
    if len(sigmas) != len(axis_sets):
        raise ValueError(
            f"{len(sigmas)} sigmas for {len(axis_sets)} groups"
        )
    unwrapped: set[int] = set()
    if args.non_toroidal:
        from .grid import AXIS_LETTERS

        for ch in args.non_toroidal.replace(",", ""):
            if ch in AXIS_LETTERS:
                unwrapped.add(AXIS_LETTERS.index(ch))
            elif ch.isdigit():
                unwrapped.add(int(ch))
            else:
                raise ValueError(f"bad --non-toroidal axis {ch!r}")
    groups = tuple(
        AxisGroup(axes, sig, tuple(a not in unwrapped for a in axes))
        for axes, sig in zip(axis_sets, sigmas)
    )
    return MaskSpec(sizes, groups, args.seed, args.density)


def cmd_gen(args) -> int:
    spec = _build_spec(args)
    progress = None
    if args.progress or spec.pixel_count >= PROGRESS_AUTO_PIXELS:
        progress = _progress_printer
    rank = generate(spec, workers=args.threads, progress=progress)
    if args.payload == "ranks":
        out = rank
    elif args.payload == "u8":
        out = finalize(rank, bits=args.bits)
    else:
        out = finalize(rank, centered=not args.paper_fidelity)
    container.encode_mask(out, args.out)
    print(f"wrote {args.out} ({spec.pixel_count} pixels, payload {args.payload})")
    return 0


# ---------------------------------------------------------------------------
# analyze

_PLANE_AXES = {"x": 0, "y": 1, "z": 2, "w": 3}


def _parse_plane(text: str) -> tuple[int, int]:
    text = text.lower()
    if len(text) != 2 or any(c not in _PLANE_AXES for c in text):
        raise ValueError(f"bad plane {text!r}, expected e.g. xy, xz, zy")
    return _PLANE_AXES[text[0]], _PLANE_AXES[text[1]]


def cmd_analyze(args) -> int:
    values = _load_noise(args.input)
    prefix = args.out_prefix or str(Path(args.input).with_suffix(""))
    wrote = []
    if args.dft:
        plane = _parse_plane(args.dft)
        spec_img = analysis.dft_plane_averaged(values, plane)
        analysis.write_spectrum_pgm(spec_img, f"{prefix}.dft_{args.dft}.pgm")
        analysis.write_spectrum_csv(spec_img, f"{prefix}.dft_{args.dft}.csv")
        wrote += [f"{prefix}.dft_{args.dft}.pgm", f"{prefix}.dft_{args.dft}.csv"]
        if args.radial:
            prof = analysis.radial_profile(spec_img, args.radial)
            analysis.write_radial_csv(prof, f"{prefix}.radial_{args.dft}.csv")
            wrote.append(f"{prefix}.radial_{args.dft}.csv")
    if args.temporal:
        prof = analysis.temporal_spectrum(values)
        analysis.write_radial_csv(prof, f"{prefix}.temporal.csv")
        wrote.append(f"{prefix}.temporal.csv")
    if args.autocorr:
        sl = values if values.ndim == 2 else values[0]
        ac = np.abs(analysis.autocorrelation(sl))
        write_pgm(np.fft.fftshift(ac), f"{prefix}.autocorr.pgm", maxval=65535)
        wrote.append(f"{prefix}.autocorr.pgm")
    if not wrote:
        raise ValueError("nothing to analyze: pass --dft, --temporal, or --autocorr")
    print("wrote " + " ".join(wrote))
    return 0


# ---------------------------------------------------------------------------
# threshold

def cmd_threshold(args) -> int:
    obj = container.decode_mask(args.input)
    ps = pointset.threshold_points(obj, args.t, slice_axis=args.slice_axis)
    pointset.write_points_csv(ps, args.out)
    wrote = [args.out]
    if args.binary:
        pointset.write_points_u16(ps, args.binary)
        wrote.append(args.binary)
    print(f"wrote {' '.join(wrote)} ({len(ps)} points)")
    return 0


# ---------------------------------------------------------------------------
# bench

def _bench_noise(args) -> tuple[np.ndarray, str]:
    if args.input:
        return _load_noise(args.input), f"file:{args.input}"
    sizes = parse_sizes(args.size)
    if len(sizes) != 3:
        raise ValueError("--size must be XxYxT for generated bench noise")
    x, y, t = sizes
    if args.noise == "white":
        return noise_zoo.white_cube(sizes, args.seed).values, "white"
    if args.noise == "stack2d":
        return noise_zoo.independent_2d_stack(x, y, t, args.seed).values, "2d-stack"
    if args.noise == "gr":
        base = finalize(generate(MaskSpec.single_group((x, y), 1.9, seed=args.seed)))
        return noise_zoo.golden_ratio_animate(base, t).values, "golden-ratio"
    if args.noise == "stbn":
        spec = MaskSpec.spatiotemporal(x, y, t, seed=args.seed)
        return finalize(generate(spec)).payload_nd().astype(np.float64), "stbn"
    raise ValueError(f"unknown noise source {args.noise!r}")


def cmd_bench(args) -> int:
    cube, provenance = _bench_noise(args)
    streams = _frame_slices(cube, args.frames, args.offset)
    if args.scheme == "mc":
        report = analysis.mc_error_series(streams, args.integrand,
                                          provenance=provenance)
    else:
        report = analysis.ema_error_series(streams, args.integrand,
                                           alpha=args.alpha,
                                           provenance=provenance)
    analysis.write_convergence_csv(report, args.out)
    print(f"wrote {args.out} (final mae {report.errors[-1]:.6g})")
    return 0


# ---------------------------------------------------------------------------
# app drivers

def _accumulate_and_report(frames, truth, args, out_path) -> np.ndarray:
    stack = apps.FrameStack(np.asarray(frames), truth, mode=args.scheme,
                            alpha=args.alpha)
    final, rmse = apps.accumulate(stack)
    if args.report:
        import csv as _csv

        with open(args.report, "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["frame", "rmse"])
            for k, r in enumerate(rmse):
                w.writerow([k, f"{r:.8g}"])
    return final


def cmd_dither(args) -> int:
    image = read_image(args.image)
    cube = _load_noise(args.noise)
    rgb = image.ndim == 3
    frames = []
    for sl in _frame_slices(cube, args.frames):
        if rgb:
            frames.append(apps.dither_rgb(image, sl, args.bits))
        else:
            frames.append(apps.dither_kbit(image, sl, args.bits))
    final = _accumulate_and_report(frames, image, args, args.out)
    (write_ppm if rgb else write_pgm)(np.clip(final, 0, 1), args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_alpha(args) -> int:
    cube = _load_noise(args.noise)
    if args.image:
        coverage = read_image(args.image)
        if coverage.ndim != 2:
            raise ValueError("coverage image must be grayscale")
    else:
        shape = cube.shape[-2:]
        coverage = np.full(shape, args.alpha_value)
    frames = [
        apps.stochastic_alpha(coverage, sl).astype(np.float64)
        for sl in _frame_slices(cube, args.frames)
    ]
    final = _accumulate_and_report(frames, coverage, args, args.out)
    write_pgm(np.clip(final, 0, 1), args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_volume(args) -> int:
    cube = _load_noise(args.noise)
    scene = apps.VolumeScene.random_bumps(args.scene_seed)
    truth = apps.reference_scatter_image(
        scene, cube.shape[-2:], samples=args.truth_samples,
        steps=args.steps, shadow_steps=args.shadow_steps,
    )
    frames = [
        apps.render_scatter_frame(scene, sl, args.steps, args.shadow_steps)
        for sl in _frame_slices(cube, args.frames)
    ]
    final = _accumulate_and_report(frames, truth, args, args.out)
    write_pgm(np.clip(final, 0, 1), args.out)
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="bluenoise",
        description="Generate and analyze blue noise masks over grouped axes.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a mask and write a container")
    p.add_argument("--size", required=True, help="extents, e.g. 64x64x16")
    p.add_argument("--groups", help="axis groups, e.g. xy,z (default: one group)")
    p.add_argument("--sigma", default="1.9", help="sigma, one value or per group")
    p.add_argument("--density", type=float, default=0.10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--non-toroidal", help="axes that do not wrap, e.g. z")
    p.add_argument("--payload", choices=("f32", "u8", "ranks"), default="f32")
    p.add_argument("--bits", type=int, default=8, help="bit depth for u8 payload")
    p.add_argument("--paper-fidelity", action="store_true",
                   help="use the plain rank/N float convention")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--progress", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("analyze", help="spectra and autocorrelation reports")
    p.add_argument("--input", required=True)
    p.add_argument("--dft", help="plane to transform, e.g. xy")
    p.add_argument("--radial", type=int, help="radial profile bin count")
    p.add_argument("--temporal", action="store_true")
    p.add_argument("--autocorr", action="store_true")
    p.add_argument("--out-prefix")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("threshold", help="threshold a mask into a point set")
    p.add_argument("--input", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--slice-axis", type=int)
    p.add_argument("--binary", help="also write packed u16 triples")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_threshold)

    p = sub.add_parser("bench", help="integration convergence benchmark")
    p.add_argument("--noise", default="stbn",
                   help="stbn | white | stack2d | gr")
    p.add_argument("--input", help="use a mask container as the noise source")
    p.add_argument("--size", default="64x64x16")
    p.add_argument("--scheme", choices=("mc", "ema"), default="mc")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--integrand", default="sine",
                   choices=sorted(analysis.INTEGRANDS))
    p.add_argument("--frames", type=int, default=64)
    p.add_argument("--offset", type=int, default=0,
                   help="start streams this many frames into the sequence")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("dither", help="k-bit dither an image over frames")
    p.add_argument("--image", required=True, help="input PGM/PPM")
    p.add_argument("--noise", required=True, help="mask container")
    p.add_argument("--bits", type=int, default=1)
    p.add_argument("--frames", type=int, default=1)
    p.add_argument("--scheme", choices=("mc", "ema"), default="mc")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--report", help="per-frame RMSE CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_dither)

    p = sub.add_parser("alpha", help="stochastic transparency over frames")
    p.add_argument("--alpha-value", type=float, default=0.9)
    p.add_argument("--image", help="coverage map PGM (overrides --alpha-value)")
    p.add_argument("--noise", required=True)
    p.add_argument("--frames", type=int, default=4)
    p.add_argument("--scheme", choices=("mc", "ema"), default="mc")
    p.add_argument("--alpha", type=float, default=0.1,
                   help="EMA blend factor")
    p.add_argument("--report")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_alpha)

    p = sub.add_parser("volume", help="single-scatter volume render over frames")
    p.add_argument("--noise", required=True)
    p.add_argument("--frames", type=int, default=8)
    p.add_argument("--steps", type=int, default=64)
    p.add_argument("--shadow-steps", type=int, default=32)
    p.add_argument("--scheme", choices=("mc", "ema"), default="ema")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--scene-seed", type=int, default=7)
    p.add_argument("--truth-samples", type=int, default=256)
    p.add_argument("--report")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_volume)

    return top


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except (ValueError, TypeError, OSError, ConvergenceError,
            container.ContainerError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
