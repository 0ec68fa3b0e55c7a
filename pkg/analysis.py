"""
Analysis

Evaluation tools for a superresolution display: conditioning of the
projection operator, slanted-edge MTF measurement, parameter sweeps of the
full build -> decompose -> simulate pipeline, and comparisons against the
baseline upsampling methods.

Author: CodeWithEzeh
Date: November 2025
"""

import csv
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from constants import *
from baselines import baseline_cubic, baseline_wobulation, integer_factor
from charts import slanted_edge
from core import ImagePlane, diffuser_footprints
from errors import AnalysisError, InvalidArgumentError, SweepPointError, TileTooLargeError
from forward_model import (apply_projection, build_axis_projections, build_projection, resample_area,
                           simulate_native)
from metrics import psnr
from solver import decompose_superres

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MtfCurve:
    """
    Modulation transfer function from a slanted edge.

    Frequencies are normalized so that the panel Nyquist limit is 1.
    """

    frequencies: np.ndarray
    magnitudes: np.ndarray
    oversampling: int
    slant: float = 0.0
    warning: str = None

    def at(self, frequency):
        """Linearly interpolated magnitude at a normalized frequency."""
        return float(np.interp(frequency, self.frequencies, self.magnitudes))


@dataclass
class SweepResult:
    """
    Metric table of a parameter sweep.

    Attributes:
        kind (str): Sweep kind
        parameters (list): Names of the swept parameters
        columns (list): Names of the metric columns
        points (list): One dict of parameter values per row
        table (list): One list of metric values per row
    """

    kind: str
    parameters: list
    columns: list
    points: list = field(default_factory=list)
    table: list = field(default_factory=list)

    def header(self):
        return list(self.parameters) + list(self.columns)

    def rows(self):
        return [[point[name] for name in self.parameters] + list(values)
                for point, values in zip(self.points, self.table)]

    def column(self, name):
        """All values of one metric column."""
        index = self.columns.index(name)
        return [values[index] for values in self.table]

    def write_csv(self, path):
        """Write the table with a header row naming parameters and metrics."""
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(self.header())
            writer.writerows(self.rows())


def _as_dense(P):
    if isinstance(P, np.ndarray):
        return P
    if sp.issparse(P):
        matrix = P
    else:
        matrix = P.to_sparse()
    rows, cols = matrix.shape
    if rows > MAX_DENSE_ROWS or cols > MAX_DENSE_COLS:
        raise TileTooLargeError(f"operator is {rows} x {cols}; singular values are limited to "
                                f"{MAX_DENSE_ROWS} x {MAX_DENSE_COLS}")
    return matrix.toarray()


def condition_number(P):
    """
    Ratio of the largest to the smallest singular value of an operator.

    Args:
        P (ProjectionOperator, sparse matrix or ndarray): Operator restricted
            to its active columns

    Returns:
        float: sigma_max / sigma_min, inf when sigma_min < 1e-12 sigma_max
    """
    dense = np.asarray(_as_dense(P), dtype=np.float64)
    if dense.shape[0] > MAX_DENSE_ROWS or dense.shape[1] > MAX_DENSE_COLS:
        raise TileTooLargeError(f"operator is {dense.shape[0]} x {dense.shape[1]}")
    if dense.size == 0:
        raise AnalysisError("operator is empty")
    sigma = np.linalg.svd(dense, compute_uv=False)
    if sigma[0] <= 0 or sigma[-1] < RANK_DEFICIENT_RATIO * sigma[0]:
        return math.inf
    return float(sigma[0] / sigma[-1])


@dataclass(frozen=True, eq=False)
class ConditioningTile:
    """
    A patch of the display padded on every side so that the diffuser footprint
    of every measured superpixel lies inside the panels.

    Attributes:
        geometry (DisplayGeometry): Padded patch
        rows (ndarray): Target rows of the measured interior
        cols (ndarray): Target columns of the measured interior
    """

    geometry: object
    rows: np.ndarray
    cols: np.ndarray


def conditioning_tile(geom, model, tile=CONDITION_TILE):
    """
    Padded patch with about tile x tile measured superpixels, same optics.

    The padding is half the rear footprint plus CONDITION_PAD panel pixels, so
    no measured row loses rays at the panel border.

    Args:
        geom (DisplayGeometry): Display layout
        model (DiffuserModel): Diffuser profile
        tile (int): Measured superpixels per side

    Returns:
        ConditioningTile
    """
    panels = max(1, int(math.ceil(tile / geom.sr_factor)))
    _, s2 = diffuser_footprints(geom, model)
    pad = int(math.ceil(s2 / (2.0 * geom.panel_pitch))) + CONDITION_PAD
    padded = replace(geom, panel_cols=panels + 2 * pad, panel_rows=panels + 2 * pad)
    start = int(round(geom.sr_factor * pad))
    inner = np.arange(start, start + int(round(geom.sr_factor * panels)))
    inner = inner[inner < padded.target_rows]
    return ConditioningTile(padded, inner, inner.copy())


def tile_condition_number(geom, model, tile=CONDITION_TILE):
    """
    Condition number of the projection restricted to the interior of a padded tile.

    The operator is the Kronecker product of its two axis operators, whose
    singular values multiply, so the result is the product of the per-axis
    condition numbers.

    Args:
        geom (DisplayGeometry): Display layout
        model (DiffuserModel): Diffuser profile
        tile (int): Measured superpixels per side

    Returns:
        float: sigma_max / sigma_min, inf for a rank-deficient axis
    """
    patch = conditioning_tile(geom, model, tile)
    rows_axis, cols_axis = build_axis_projections(patch.geometry, model, patch.rows, patch.cols)
    return condition_number(rows_axis.matrix) * condition_number(cols_axis.matrix)


def _edge_profile(values):
    """Per-row derivative of an image with a near-vertical edge."""
    deriv = np.zeros_like(values)
    deriv[:, 1:-1] = 0.5 * (values[:, 2:] - values[:, :-2])
    return deriv


def mtf_slanted_edge(image, edge_angle_hint=None, oversampling=MTF_OVERSAMPLING, scale=1.0):
    """
    Measure the MTF of a slanted edge.

    The edge position in every row is the centroid of the row derivative; a
    line fitted through the centroids gives the edge. Pixels are projected
    onto the edge normal and averaged into bins of 1/oversampling pixel (the
    edge spread function, empty bins interpolated). Its derivative (the line
    spread function) is centered, Hamming windowed and Fourier transformed.

    Args:
        image (ImagePlane): Image with one near-vertical or near-horizontal edge
        edge_angle_hint (float): Expected slant in degrees, only checked
        oversampling (int): Bins per pixel
        scale (float): Image pixels per panel pixel (the superresolution factor)

    Returns:
        MtfCurve
    """
    if oversampling < 1:
        raise InvalidArgumentError("oversampling must be >= 1")
    values = image.to_gray().values
    if values.shape[0] < 3 or values.shape[1] < 3:
        raise AnalysisError(f"image {values.shape} is too small for an edge measurement")
    horizontal = np.abs(np.diff(values, axis=0)).sum() > np.abs(np.diff(values, axis=1)).sum()
    if horizontal:
        values = values.T

    deriv = np.abs(_edge_profile(values))
    energy = deriv.sum(axis=1)
    rows = np.flatnonzero(energy >= MTF_EDGE_THRESHOLD)
    if rows.size < 2:
        raise AnalysisError("no detectable edge in the image")
    xs = np.arange(values.shape[1])
    centroids = (deriv[rows] * xs[None, :]).sum(axis=1) / energy[rows]
    slope, intercept = np.polyfit(rows, centroids, 1)
    slant = math.degrees(math.atan(slope))

    warning = None
    if not (MTF_MIN_SLANT <= abs(slant) <= MTF_MAX_SLANT):
        warning = f"edge slant {slant:.2f} deg outside {MTF_MIN_SLANT:g}-{MTF_MAX_SLANT:g} deg"
        logger.warning(warning)
    if edge_angle_hint is not None and abs(abs(slant) - abs(edge_angle_hint)) > 1.0:
        logger.warning("measured slant %.2f deg differs from the expected %.2f deg", slant, edge_angle_hint)

    ys, xg = np.meshgrid(np.arange(values.shape[0]), xs, indexing="ij")
    dist = (xg - (slope * ys + intercept)) * math.cos(math.atan(slope))
    bins = np.floor(dist * oversampling).astype(np.int64)
    bins -= bins.min()
    counts = np.bincount(bins.ravel())
    sums = np.bincount(bins.ravel(), weights=values.ravel())
    filled = counts > 0
    positions = np.arange(counts.size)
    if not np.all(filled):
        logger.debug("%d empty edge bins interpolated", int(np.count_nonzero(~filled)))
    esf = np.interp(positions, positions[filled], sums[filled] / counts[filled])

    lsf = np.gradient(esf)
    n = lsf.size
    lsf = np.roll(lsf, n // 2 - int(np.argmax(np.abs(lsf))))
    spectrum = np.abs(np.fft.rfft(lsf * np.hamming(n)))
    if spectrum[0] <= 0:
        raise AnalysisError("edge has no contrast")
    freqs = np.fft.rfftfreq(n, d=1.0 / oversampling)
    # Central difference transfer function
    correction = (1.0 / np.sinc(2.0 * freqs / oversampling)).clip(0.0, 10.0)
    magnitudes = spectrum / spectrum[0] * correction
    return MtfCurve(2.0 * scale * freqs, magnitudes, int(oversampling), slant, warning)


@dataclass
class SuperresRun:
    """Result of one build -> decompose -> simulate pipeline run."""

    patterns: object
    diagnostics: object
    perceived: ImagePlane
    target: ImagePlane
    psnr: float


def evaluate_superres(image, geom, model, rank, cfg, lower=0.0):
    """
    Run the superresolution pipeline on an image.

    The image is area-resampled to the target resolution of geom first.

    Args:
        image (ImagePlane): Single-channel test image
        geom (DisplayGeometry): Display layout
        model (DiffuserModel): Diffuser profile
        rank (int): Number of frames
        cfg (SolverConfig): Solver schedule
        lower (float): Pattern lower bound

    Returns:
        SuperresRun
    """
    target = image.to_gray()
    if target.shape != geom.target_shape:
        target = resample_area(target, geom.target_shape)
    P = build_projection(geom, model)
    patterns, diagnostics = decompose_superres(target, P, rank, cfg, lower)
    perceived = apply_projection(P, patterns)
    return SuperresRun(patterns, diagnostics, perceived, target, psnr(perceived, target))


def compare_methods(target, geom, model, rank, cfg):
    """
    Perceived images of every method for one target.

    Args:
        target (ImagePlane): Single-channel image at target resolution
        geom (DisplayGeometry): Display layout
        model (DiffuserModel): Diffuser profile
        rank (int): Frames of the dual-layer display and subframes of wobulation
        cfg (SolverConfig): Solver schedule

    Returns:
        dict: method name -> perceived ImagePlane, including the target itself
    """
    sr = integer_factor(geom)
    run = evaluate_superres(target, geom, model, rank, cfg)
    results = {
        "target": run.target,
        "native": simulate_native(run.target, geom),
        "cubic": baseline_cubic(run.target, geom),
        "ours": run.perceived,
    }
    if sr is None:
        logger.warning("wobulation skipped: sr_factor %g is not an integer", geom.sr_factor)
    elif rank <= sr * sr:
        results["wobulation"] = baseline_wobulation(run.target, rank, geom)
    else:
        logger.warning("wobulation skipped: rank %d exceeds %d phases", rank, sr * sr)
    return results


def mtf_comparison(geom, model, rank, cfg, oversampling=MTF_OVERSAMPLING, angle=EDGE_SLANT,
                   extra_ranks=()):
    """
    MTF of every method on a slanted-edge chart at target resolution.

    Args:
        geom (DisplayGeometry): Display layout
        model (DiffuserModel): Diffuser profile
        rank (int): Number of frames
        cfg (SolverConfig): Solver schedule
        oversampling (int): Edge bins per pixel
        angle (float): Edge slant in degrees
        extra_ranks (iterable): Further ranks of the dual-layer display, reported as "ours_k<r>"

    Returns:
        dict: method name -> MtfCurve
    """
    chart = slanted_edge(geom.target_rows, geom.target_cols, angle)
    images = compare_methods(chart, geom, model, rank, cfg)
    for extra in extra_ranks:
        images[f"ours_k{extra}"] = evaluate_superres(chart, geom, model, extra, cfg).perceived
    return {name: mtf_slanted_edge(img, angle, oversampling, scale=geom.sr_factor)
            for name, img in images.items()}


SWEEP_COLUMNS = {
    SWEEP_CONDITIONING: ["condition_number"],
    SWEEP_DISTANCE: ["psnr", "native_psnr"],
    SWEEP_RANK: ["psnr", "native_psnr"],
    SWEEP_FACTOR: ["psnr", "native_psnr", "wobulation_psnr"],
}

SWEEP_DEFAULTS = {
    SWEEP_CONDITIONING: {"distance": DEFAULT_DISTANCES, "spread": DEFAULT_SPREADS},
    SWEEP_DISTANCE: {"distance": DEFAULT_DISTANCES},
    SWEEP_RANK: {"rank": DEFAULT_RANKS},
    SWEEP_FACTOR: {"factor": DEFAULT_FACTORS},
}


def parse_sweep_grid(text):
    """
    Parse a grid string such as "distance=0.3,1;spread=5,7.5".

    Args:
        text (str): Grid string

    Returns:
        dict: name -> list of floats
    """
    grid = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        if "=" not in part:
            raise InvalidArgumentError(f"grid entry {part!r} is not name=v1,v2,...")
        name, values = (s.strip() for s in part.split("=", 1))
        try:
            grid[name] = [float(v) for v in values.split(",") if v.strip()]
        except ValueError:
            raise InvalidArgumentError(f"grid entry {part!r} has a non-numeric value") from None
        if not grid[name]:
            raise InvalidArgumentError(f"grid entry {name!r} has no values")
    return grid


def _grid_points(kind, grid):
    defaults = SWEEP_DEFAULTS[kind]
    unknown = set(grid) - set(defaults)
    if unknown:
        raise AnalysisError(f"{kind} sweep has no parameter(s) {sorted(unknown)}; "
                            f"expected {sorted(defaults)}")
    names = list(defaults)
    axes = [list(grid.get(name, defaults[name])) for name in names]
    points = [{}]
    for name, axis in zip(names, axes):
        points = [dict(p, **{name: v}) for p in points for v in axis]
    return names, points


def _sweep_point(kind, point, image, cfg, geom, model, rank):
    if kind == SWEEP_CONDITIONING:
        return [tile_condition_number(replace(geom, gap_diffuser=point["distance"]),
                                      replace(model, half_angle=point["spread"]))]

    if kind == SWEEP_DISTANCE:
        geom = replace(geom, gap_diffuser=point["distance"])
    elif kind == SWEEP_RANK:
        rank = int(point["rank"])
    elif kind == SWEEP_FACTOR:
        geom = replace(geom, sr_factor=point["factor"])
    run = evaluate_superres(image, geom, model, rank, cfg)
    row = [run.psnr, psnr(simulate_native(run.target, geom), run.target)]
    if kind == SWEEP_FACTOR:
        sr = integer_factor(geom)
        if sr is None:
            row.append(math.nan)
        else:
            row.append(psnr(baseline_wobulation(run.target, min(rank, sr * sr), geom), run.target))
    return row


def sweep(kind, grid, image, cfg, geom, model, rank=RANK):
    """
    Run the pipeline over a parameter grid.

    Args:
        kind (str): One of SWEEP_KINDS
        grid (dict or str): name -> values, or a grid string;
            missing names take their defaults
        image (ImagePlane): Test image (unused by the conditioning sweep)
        cfg (SolverConfig): Solver schedule
        geom (DisplayGeometry): Base display layout
        model (DiffuserModel): Base diffuser profile
        rank (int): Frames, unless swept

    Returns:
        SweepResult
    """
    if kind not in SWEEP_KINDS:
        raise AnalysisError(f"unknown sweep kind {kind!r}; expected one of {', '.join(SWEEP_KINDS)}")
    if isinstance(grid, str):
        grid = parse_sweep_grid(grid)
    if kind != SWEEP_CONDITIONING and image is None:
        raise AnalysisError(f"{kind} sweep needs a test image")
    names, points = _grid_points(kind, grid or {})
    result = SweepResult(kind, names, list(SWEEP_COLUMNS[kind]))
    for point in points:
        try:
            row = _sweep_point(kind, point, image, cfg, geom, model, rank)
        except Exception as exc:
            raise SweepPointError(point, exc) from exc
        logger.info("%s %s -> %s", kind, point, ", ".join(f"{v:.4g}" for v in row))
        result.points.append(point)
        result.table.append(row)
    return result
