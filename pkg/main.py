"""
Superresolution Display - Main Module

Command-line front end: decompose target images into pattern pairs for a
dual-layer LCD display (superresolution, HDR or 3D), run the analyses, and
generate test charts.

    python main.py decompose --config display.cfg --target photo.ppm --out run/
    python main.py analyze sweep rank --config display.cfg --target photo.ppm --out sweep/
    python main.py chart slanted_edge --out edge.pgm

Author: CodeWithEzeh
Date: November 2025
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from constants import *
from analysis import compare_methods, mtf_comparison, mtf_slanted_edge, parse_sweep_grid, sweep
from artifacts import (build_manifest, ensure_dir, join_view_mosaic, split_view_mosaic,
                       write_diagnostics, write_manifest, write_mtf_curves, write_objective,
                       write_patterns, write_table)
from charts import chart_by_name
from config import RunConfig, load_config
from core import ImagePlane, degrees_of_freedom_ratio, max_rank_for_refresh
from display_modes import (decompose_3d, decompose_hdr, lightfield_geometry,
                           lightfield_target_from_views, simulate_hdr, view_psnr)
from errors import ConfigError, DisplayError, ImageIOError, SolverDivergedError
from forward_model import (apply_projection, build_projection, load_projection, render_views,
                           resample_area, save_projection, simulate_native)
from image_io import read_image, write_image
from metrics import psnr
from solver import decompose_channels

logger = logging.getLogger("main")

SWEEP_ALIASES = {
    "conditioning": SWEEP_CONDITIONING,
    "distance": SWEEP_DISTANCE,
    "rank": SWEEP_RANK,
    "factor": SWEEP_FACTOR,
}


def load_run_config(args):
    """Read the configuration named on the command line and apply flag overrides."""
    config = load_config(args.config) if args.config else RunConfig()
    rank = getattr(args, "rank", None)
    refresh = getattr(args, "refresh_hz", None)
    if rank is None and refresh is not None:
        rank = max_rank_for_refresh(refresh)
        logger.info("rank %d from %.0f Hz refresh", rank, refresh)
    return config.with_overrides(rank=rank, seed=getattr(args, "seed", None))


def _fit(image, shape, what):
    if image.shape != tuple(shape):
        logger.info("resampling %s from %s to %s", what, image.shape, tuple(shape))
        return resample_area(image, shape)
    return image


def _output_suffix(image):
    return ".pgm" if image.channels == 1 else ".ppm"


def projection_for(config, cache=None):
    """
    Projection operator of the configured display, optionally cached on disk.

    An existing cache file is loaded instead of building the operator; a
    missing one is written after building. The file holds no geometry, so it
    must only be reused with the configuration that wrote it.

    Args:
        config (RunConfig): Display and diffuser
        cache (str or Path): Optional operator file

    Returns:
        ProjectionOperator
    """
    geom = config.geometry
    if cache is not None and Path(cache).exists():
        logger.info("loading projection operator from %s", cache)
        return load_projection(cache, geom.target_shape, geom.panel_shape)
    P = build_projection(geom, config.diffuser)
    if cache is not None:
        save_projection(P, cache)
    return P


def decompose_superres_run(config, image, out_dir, projection=None):
    """Superresolution mode: patterns, perceived image and native baseline."""
    geom = config.geometry
    target = _fit(image, geom.target_shape, "target")
    P = projection_for(config, projection)
    patterns, diagnostics = decompose_channels(target, P, config.rank, config.solver)
    perceived = ImagePlane.merge_channels([apply_projection(P, pat) for pat in patterns])
    native = simulate_native(target, geom)
    ours_db, native_db = psnr(perceived, target), psnr(native, target)
    logger.info("PSNR %.2f dB, native %.2f dB", ours_db, native_db)

    suffix = _output_suffix(target)
    files = write_patterns(out_dir, patterns)
    write_image(out_dir / f"perceived{suffix}", perceived)
    write_image(out_dir / f"native{suffix}", native)
    write_diagnostics(out_dir / DIAGNOSTICS_NAME, diagnostics)
    extra = {
        "psnr": round(ours_db, 6),
        "native_psnr": round(native_db, 6),
        "converged": all(d.converged for d in diagnostics),
        "iterations": [d.iterations for d in diagnostics],
        "degrees_of_freedom": round(degrees_of_freedom_ratio(geom, config.rank), 6),
    }
    if projection is not None:
        extra["projection"] = str(projection)
    return build_manifest(MODE_SUPERRES, config, 0.0, files, f"perceived{suffix}", extra)


def decompose_hdr_run(config, image, out_dir):
    """HDR mode: patterns bounded at the black level and the perceived image."""
    geom = config.geometry
    image = _fit(image, geom.panel_shape, "image")
    patterns, reports, perceived, single = [], [], [], []
    for plane in image.split_channels():
        pat, report = decompose_hdr(plane, config.rank, config.black_level, geom, config.views, config.solver)
        seen, flat = simulate_hdr(pat, config.black_level, plane)
        patterns.append(pat)
        reports.append(report)
        perceived.append(seen)
        single.append(flat)

    suffix = _output_suffix(image)
    files = write_patterns(out_dir, patterns)
    write_image(out_dir / f"perceived{suffix}", ImagePlane.merge_channels(perceived))
    write_image(out_dir / f"single_panel{suffix}", ImagePlane.merge_channels(single))
    write_objective(out_dir / DIAGNOSTICS_NAME, reports[0].objective)
    extra = {
        "unreachable_pixels": sum(r.unreachable_pixels for r in reports),
        "views": config.views.count,
        "black_level": config.black_level,
    }
    return build_manifest(MODE_HDR, config, config.black_level, files, f"perceived{suffix}", extra)


def decompose_lightfield_run(config, mosaic, out_dir):
    """3D mode: the target is a mosaic of view_rows x view_cols views."""
    geom = config.geometry
    views = split_view_mosaic(mosaic, config.views, geom.panel_shape)
    target = lightfield_target_from_views(views, geom, config.views)
    pat, report = decompose_3d(target, config.rank, config.solver)
    scores = view_psnr(pat, target, geom)
    logger.info("view PSNR min %.2f dB, mean %.2f dB", min(scores), float(np.mean(scores)))

    files = write_patterns(out_dir, pat)
    rendered = render_views(pat, lightfield_geometry(geom), config.views)
    write_image(out_dir / "views.pgm", join_view_mosaic(rendered, config.views))
    write_objective(out_dir / DIAGNOSTICS_NAME, report.objective)
    extra = {"view_psnr": [round(s, 6) for s in scores], "views": config.views.count}
    return build_manifest(MODE_LIGHTFIELD, config, 0.0, files, "views.pgm", extra)


def cmd_decompose(args):
    config = load_run_config(args)
    image = read_image(args.target)
    out_dir = ensure_dir(args.out)
    logger.info("%s decomposition of %s at rank %d", args.mode, args.target, config.rank)
    if args.mode == MODE_SUPERRES:
        manifest = decompose_superres_run(config, image, out_dir, args.projection)
    elif args.mode == MODE_HDR:
        manifest = decompose_hdr_run(config, image, out_dir)
    else:
        manifest = decompose_lightfield_run(config, image, out_dir)
    write_manifest(out_dir, manifest)
    return EXIT_OK


def _test_image(args, geom):
    if args.target:
        return read_image(args.target).to_gray()
    logger.info("no --target given, using a generated scene")
    return chart_by_name("scene", geom.target_rows, geom.target_cols)


def cmd_conditioning(args, config, out_dir):
    grid = parse_sweep_grid(args.sweep_grid) if args.sweep_grid else {}
    result = sweep(SWEEP_CONDITIONING, grid, None, config.solver, config.geometry, config.diffuser)
    result.write_csv(out_dir / "conditioning.csv")
    finite = [(v, p) for v, p in zip(result.column("condition_number"), result.points) if np.isfinite(v)]
    if finite:
        best, point = min(finite, key=lambda item: item[0])
        logger.info("lowest condition number %.4g at %s", best, point)


def cmd_mtf(args, config, out_dir):
    if args.target:
        scale = config.geometry.sr_factor if args.config else 1.0
        curves = {"image": mtf_slanted_edge(read_image(args.target), None, args.oversample, scale)}
    elif args.config:
        extra = [k for k in (2,) if k != config.rank]
        curves = mtf_comparison(config.geometry, config.diffuser, config.rank, config.solver,
                                args.oversample, extra_ranks=extra)
    else:
        curves = {"edge": mtf_slanted_edge(chart_by_name("slanted_edge"), EDGE_SLANT, args.oversample)}
    for name, curve in curves.items():
        logger.info("%s: MTF %.3f at the panel Nyquist limit%s", name, curve.at(1.0),
                    f" ({curve.warning})" if curve.warning else "")
    write_mtf_curves(out_dir / "mtf.csv", curves)


def cmd_sweep(args, config, out_dir):
    kind = SWEEP_ALIASES.get(args.kind, args.kind)
    grid = parse_sweep_grid(args.sweep_grid) if args.sweep_grid else {}
    image = None if kind == SWEEP_CONDITIONING else _test_image(args, config.geometry)
    result = sweep(kind, grid, image, config.solver, config.geometry, config.diffuser, config.rank)
    result.write_csv(out_dir / f"{kind}.csv")


def cmd_baselines(args, config, out_dir):
    target = _fit(_test_image(args, config.geometry), config.geometry.target_shape, "target")
    results = compare_methods(target, config.geometry, config.diffuser, config.rank, config.solver)
    rows = []
    for name, perceived in results.items():
        rows.append([name, psnr(perceived, results["target"])])
        write_image(out_dir / f"{name}.pgm", perceived)
        logger.info("%-10s %.2f dB", name, rows[-1][1])
    write_table(out_dir / "baselines.csv", ["method", "psnr"], rows)


ANALYSES = {
    "conditioning": cmd_conditioning,
    "mtf": cmd_mtf,
    "sweep": cmd_sweep,
    "baselines": cmd_baselines,
}


def cmd_analyze(args):
    config = load_run_config(args)
    out_dir = ensure_dir(args.out)
    ANALYSES[args.analysis](args, config, out_dir)
    return EXIT_OK


def cmd_chart(args):
    extra = {}
    if args.name == "slanted_edge":
        extra = {"angle": args.angle, "blur_sigma": args.blur}
    elif args.name == "chirp" and args.max_freq is not None:
        extra = {"max_freq": args.max_freq}
    elif args.name == "checkerboard":
        extra = {"cell": args.cell}
    image = chart_by_name(args.name, args.size, args.size, **extra)
    write_image(args.out, image)
    logger.info("wrote %s chart to %s", args.name, args.out)
    return EXIT_OK


def build_parser():
    """Create the argument parser with all subcommands."""
    parser = argparse.ArgumentParser(prog="main.py", description="Dual-layer superresolution display toolkit")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="log every solver iteration")
    verbosity.add_argument("--quiet", action="store_true", help="log warnings and errors only")
    commands = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(sub):
        sub.add_argument("--config", help="display configuration file (key = value)")
        sub.add_argument("--target", help="target image")
        sub.add_argument("--rank", type=int, help="number of frames K")
        sub.add_argument("--seed", type=int, help="solver seed")
        sub.add_argument("--refresh-hz", type=float, help="panel refresh rate; sets K when --rank is absent")
        sub.add_argument("--out", required=True, help="output directory")

    decompose = commands.add_parser("decompose", help="compute pattern pairs for a target image")
    add_run_flags(decompose)
    decompose.add_argument("--mode", choices=DISPLAY_MODES, default=MODE_SUPERRES)
    decompose.add_argument("--projection", help="projection operator cache file (superres mode)")
    decompose.set_defaults(handler=cmd_decompose)

    analyze = commands.add_parser("analyze", help="conditioning, MTF, sweeps and baselines")
    analyses = analyze.add_subparsers(dest="analysis", required=True)
    for name in ANALYSES:
        sub = analyses.add_parser(name)
        if name == "sweep":
            sub.add_argument("kind", choices=sorted(set(SWEEP_ALIASES) | set(SWEEP_KINDS)))
        add_run_flags(sub)
        sub.add_argument("--sweep-grid", help="grid such as 'distance=0.3,1;spread=5,7.5'")
        sub.add_argument("--oversample", type=int, default=MTF_OVERSAMPLING, help="edge bins per pixel")
        sub.set_defaults(handler=cmd_analyze)

    chart = commands.add_parser("chart", help="write a test chart")
    chart.add_argument("name", choices=("slanted_edge", "chirp", "checkerboard", "scene"))
    chart.add_argument("--out", required=True, help="output image file")
    chart.add_argument("--size", type=int, default=CHART_SIZE, help="chart side in pixels")
    chart.add_argument("--angle", type=float, default=EDGE_SLANT, help="edge slant in degrees")
    chart.add_argument("--blur", type=float, default=0.0, help="edge blur sigma in pixels")
    chart.add_argument("--max-freq", type=float, help="chirp end frequency (panel Nyquist = 1)")
    chart.add_argument("--cell", type=int, default=CHECKER_CELL, help="checker cell in pixels")
    chart.set_defaults(handler=cmd_chart)
    return parser


def main(argv=None):
    """
    Parse the command line, run one command and map errors onto exit codes.

    Returns:
        int: Process exit status
    """
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except ImageIOError as exc:
        logger.error("I/O error: %s", exc)
        return EXIT_IO
    except SolverDivergedError as exc:
        logger.error("solver diverged at iteration %d: %s", exc.iteration, exc)
        return EXIT_DIVERGED
    except DisplayError as exc:
        logger.error("%s", exc)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
