"""
Run Artifacts

Everything a run leaves on disk: pattern images (one file per frame and
panel), the JSON manifest describing the run, the diagnostics CSV, and view
mosaics for the 3D mode. Nothing written here depends on the clock, so equal
inputs give byte-identical artifacts.

Author: CodeWithEzeh
Date: November 2025
"""

import csv
import json
import logging
from pathlib import Path

import numpy as np

from constants import *
from core import ImagePlane
from errors import DimensionError, ImageIOError
from image_io import write_image

logger = logging.getLogger(__name__)


def ensure_dir(path):
    """Create an output directory (and parents) if needed."""
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ImageIOError(f"cannot create output directory {path}: {exc.strerror}") from None
    return path


def write_patterns(out_dir, patterns, bits=PATTERN_BITS):
    """
    Write every frame of a pattern set as panel-resolution images.

    Args:
        out_dir (str or Path): Output directory
        patterns (PatternSet or list): One PatternSet, or one per colour channel
        bits (int): Bit depth of the files

    Returns:
        dict: {"front": [file names], "rear": [file names]}
    """
    out_dir = ensure_dir(out_dir)
    channels = patterns if isinstance(patterns, (list, tuple)) else [patterns]
    suffix = ".pgm" if len(channels) == 1 else ".ppm"
    files = {"front": [], "rear": []}
    for k in range(channels[0].rank):
        frames = [pat.frame(k) for pat in channels]
        for panel, index in (("front", 0), ("rear", 1)):
            name = f"{panel}_{k:02d}{suffix}"
            image = ImagePlane.merge_channels([frame[index] for frame in frames])
            write_image(out_dir / name, image, bits)
            files[panel].append(name)
    logger.info("wrote %d frame pairs to %s", channels[0].rank, out_dir)
    return files


def build_manifest(mode, config, lower_bound, files, perceived=None, extra=None):
    """
    Manifest contents of a decomposition run.

    Args:
        mode (str): Display mode
        config (RunConfig): Configuration of the run
        lower_bound (float): Pattern lower bound b
        files (dict): Pattern file names per panel
        perceived (str): File name of the simulated perceived image
        extra (dict): Additional entries (metrics, view counts)

    Returns:
        dict
    """
    manifest = {
        "mode": mode,
        "rank": config.rank,
        "lower_bound": lower_bound,
        "seed": config.solver.seed,
        "geometry_hash": config.digest(),
        "geometry": config.geometry.describe(),
        "files": files,
    }
    if perceived is not None:
        manifest["perceived"] = perceived
    if extra:
        manifest.update(extra)
    return manifest


def write_manifest(out_dir, manifest, name=MANIFEST_NAME):
    """Write the manifest as sorted, indented JSON."""
    path = Path(out_dir) / name
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as exc:
        raise ImageIOError(f"cannot write manifest {path}: {exc.strerror}") from None
    return path


def read_manifest(path):
    """Load a manifest written by write_manifest."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ImageIOError(f"cannot read manifest {path}: {exc}") from None


def write_table(path, header, rows):
    """Write a CSV table with a header row."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc.strerror}") from None
    return Path(path)


def write_diagnostics(path, diagnostics):
    """
    Write solver diagnostics as CSV.

    Args:
        path (str or Path): Destination file
        diagnostics (Diagnostics or list): One per colour channel when a list

    Returns:
        Path
    """
    if isinstance(diagnostics, (list, tuple)) and len(diagnostics) > 1:
        rows = [[c] + row for c, diag in enumerate(diagnostics) for row in diag.rows()]
        return write_table(path, ["channel", "iter", "primal_residual", "fact_error", "psnr", "stage"], rows)
    if isinstance(diagnostics, (list, tuple)):
        diagnostics = diagnostics[0]
    return write_table(path, ["iter", "primal_residual", "fact_error", "psnr", "stage"], diagnostics.rows())


def write_objective(path, objective):
    """Write a factorization objective history as CSV."""
    return write_table(path, ["iter", "objective"], [[i + 1, v] for i, v in enumerate(objective)])


def write_mtf_curves(path, curves):
    """
    Write MTF curves as CSV, one column per method, on the first curve's frequencies.

    Args:
        path (str or Path): Destination file
        curves (dict): name -> MtfCurve
    """
    names = list(curves)
    freqs = curves[names[0]].frequencies
    columns = [freqs] + [np.interp(freqs, curves[n].frequencies, curves[n].magnitudes) for n in names]
    return write_table(path, ["frequency"] + names, np.column_stack(columns).tolist())


def split_view_mosaic(mosaic, grid, panel_shape):
    """
    Cut a mosaic of view_rows x view_cols tiles into single views.

    Args:
        mosaic (ImagePlane): Tiled views, row-major over the grid
        grid (ViewGrid): View directions
        panel_shape (tuple): (rows, cols) of one view

    Returns:
        list: One ImagePlane per view, in grid order
    """
    rows, cols = panel_shape
    expected = (grid.rows * rows, grid.cols * cols)
    if mosaic.shape != expected:
        raise DimensionError(f"view mosaic is {mosaic.shape}, expected {expected} "
                             f"for {grid.rows} x {grid.cols} views of {panel_shape}")
    values = mosaic.to_gray().values
    return [ImagePlane(values[r * rows:(r + 1) * rows, c * cols:(c + 1) * cols])
            for r in range(grid.rows) for c in range(grid.cols)]


def join_view_mosaic(views, grid):
    """Tile views row-major into one mosaic image."""
    rows = [np.concatenate([views[r * grid.cols + c].values for c in range(grid.cols)], axis=1)
            for r in range(grid.rows)]
    return ImagePlane(np.concatenate(rows, axis=0))
