"""
Display Modes

With the diffuser switched off, the same two panels emit a light field
instead of a superresolved image. Two modes use this:

- HDR: a light field with no angular variation. Front and rear panel
  transmittances multiply, so the displayed black falls to b^2 for a panel
  black level b.
- 3D: a light field that varies over a grid of views (glasses-free 3D).

Both are a weighted, box-constrained low-rank factorization of a light field
target. Views are given as integer shifts s between the front pixel a a ray
leaves and the rear pixel b = a - s it came through.

Author: CodeWithEzeh
Date: November 2025
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from constants import *
from core import ActiveSupport, ImagePlane, MaskedLightField, PatternSet
from errors import DimensionError, InvalidArgumentError
from factorization import factorization_objective, factorize_box
from forward_model import render_view
from metrics import psnr

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LightFieldTarget:
    """
    A light field target over a view grid.

    Attributes:
        lightfield (MaskedLightField): Values and weights on the active pairs
        grid (ViewGrid): View directions
        view_values (ndarray): V x rows x cols target per view, indexed by front pixel
        view_masks (ndarray): V x rows x cols, True where the view's ray hits the rear panel
    """

    lightfield: MaskedLightField
    grid: object
    view_values: np.ndarray
    view_masks: np.ndarray

    @property
    def panel_shape(self):
        return self.view_values.shape[1:]

    @property
    def view_count(self):
        return self.view_values.shape[0]


@dataclass
class ModeReport:
    """Outcome of an HDR or 3D factorization."""

    rank: int
    lower_bound: float
    objective: list = field(default_factory=list)
    unreachable_pixels: int = 0

    @property
    def final_objective(self):
        return self.objective[-1] if self.objective else float("nan")


def lightfield_geometry(geom):
    """
    Geometry used to render the diffuser-off modes: the front panel is the
    parameterization plane and views are sampled at panel resolution.
    """
    return replace(geom, gap_diffuser=0.0, sr_factor=1.0)


def _view_rays(shape, shift):
    """Front pixels whose ray in direction `shift` lands on the rear panel, and those rear pixels."""
    rows, cols = shape
    sy, sx = shift
    ys, xs = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    ry, rx = ys - sy, xs - sx
    mask = (ry >= 0) & (ry < rows) & (rx >= 0) & (rx < cols)
    return mask, ry, rx


def lightfield_target_from_views(views, geom, grid):
    """
    Assemble a light field target from one image per view.

    View v with shift s sets entry (a, a - s) of the light field matrix to
    views[v][a], weight 1, wherever a - s lies on the rear panel. Pairs hit by
    more than one view keep the weight sum and the weighted mean value.

    Args:
        views (list): One ImagePlane per view at panel resolution, in grid order
        geom (DisplayGeometry): Display layout
        grid (ViewGrid): View directions

    Returns:
        LightFieldTarget
    """
    shifts = grid.shifts()
    if not shifts:
        raise InvalidArgumentError("view grid is empty")
    if len(views) != len(shifts):
        raise DimensionError(f"{len(views)} view images for a grid of {len(shifts)} views")
    shape = geom.panel_shape
    cols = shape[1]

    values, masks = [], []
    fronts, rears, data = [], [], []
    for view, shift in zip(views, shifts):
        img = view.values if isinstance(view, ImagePlane) else np.asarray(view, dtype=np.float64)
        if img.shape != shape:
            raise DimensionError(f"view image is {img.shape}, panel is {shape}")
        mask, ry, rx = _view_rays(shape, shift)
        ys, xs = np.nonzero(mask)
        fronts.append(ys * cols + xs)
        rears.append(ry[mask] * cols + rx[mask])
        data.append(img[mask])
        values.append(img)
        masks.append(mask)

    front = np.concatenate(fronts)
    rear = np.concatenate(rears)
    data = np.concatenate(data)
    m = geom.panel_count
    pairs, inverse = np.unique(front * m + rear, return_inverse=True)
    inverse = inverse.ravel()
    weight = np.bincount(inverse, minlength=pairs.size).astype(np.float64)
    value = np.bincount(inverse, weights=data, minlength=pairs.size) / weight
    support = ActiveSupport(pairs // m, pairs % m, m)
    return LightFieldTarget(MaskedLightField(support, value, weight), grid,
                            np.stack(values), np.stack(masks))


def build_uniform_lightfield_target(image, geom, views):
    """
    Light field target with no angular variation: every ray leaving front
    pixel a carries image[a].

    Args:
        image (ImagePlane): Single-channel image at panel resolution
        geom (DisplayGeometry): Display layout
        views (ViewGrid): Directions over which uniformity is enforced

    Returns:
        LightFieldTarget
    """
    if image.channels != 1:
        raise DimensionError("HDR targets are built per channel")
    count = views.count
    if count == 0:
        raise InvalidArgumentError("view grid is empty")
    return lightfield_target_from_views([image] * count, geom, views)


def decompose_3d(lf_target, K, cfg, lower=0.0, iters=STANDALONE_FACT_ITERS, init=None):
    """
    Weighted box-constrained rank-K factorization of a light field target.

    Args:
        lf_target (LightFieldTarget): Target light field
        K (int): Number of frames
        cfg (SolverConfig): Supplies the seed
        lower (float): Pattern lower bound
        iters (int): Factorization alternations
        init (tuple): Optional (F, G) warm start

    Returns:
        tuple: (PatternSet, ModeReport)
    """
    masked = lf_target.lightfield
    if np.any(masked.values < 0) or np.any(masked.values > 1):
        raise InvalidArgumentError("light field target values must lie in [0, 1]")
    report = ModeReport(rank=K, lower_bound=lower)
    front, rear = factorize_box(masked, K, lower, cfg, init=init, iters=iters,
                                history=report.objective)
    logger.info("factorized %d views at rank %d: objective %.4e",
                lf_target.view_count, K, report.final_objective)
    return PatternSet(front, rear, lower, lf_target.panel_shape), report


def decompose_hdr(image, K, black_level, geom, views, cfg, iters=STANDALONE_FACT_ITERS):
    """
    High dynamic range decomposition of a 2D image.

    Args:
        image (ImagePlane): Single-channel image at panel resolution
        K (int): Number of frames
        black_level (float): Per-panel black level b
        geom (DisplayGeometry): Display layout
        views (ViewGrid): Directions over which uniformity is enforced
        cfg (SolverConfig): Supplies the seed
        iters (int): Factorization alternations

    Returns:
        tuple: (PatternSet, ModeReport)
    """
    if not (0.0 <= black_level < 1.0):
        raise InvalidArgumentError(f"black_level must lie in [0, 1), got {black_level}")
    target = build_uniform_lightfield_target(image, geom, views)
    patterns, report = decompose_3d(target, K, cfg, lower=black_level, iters=iters)
    floor = black_level * black_level
    report.unreachable_pixels = int(np.count_nonzero(image.values < floor - 1e-12))
    if report.unreachable_pixels:
        logger.warning("%d pixels are darker than the dual-layer black %.4f",
                       report.unreachable_pixels, floor)
    return patterns, report


def simulate_hdr(pat, black_level, image=None):
    """
    Perceived on-axis image of an HDR pattern set.

    Args:
        pat (PatternSet): Front and rear frames
        black_level (float): Per-panel black level b
        image (ImagePlane): Optional source image for the single-panel rendition

    Returns:
        tuple: (perceived ImagePlane, single-panel ImagePlane or None)
    """
    if pat.lower_bound + 1e-12 < black_level:
        logger.warning("patterns are bounded at %.3f, below the black level %.3f",
                       pat.lower_bound, black_level)
    perceived = np.mean(pat.front * pat.rear, axis=1).reshape(pat.panel_shape)
    single = None
    if image is not None:
        single = ImagePlane(np.maximum(image.values, black_level))
    return ImagePlane(perceived), single


def view_psnr(pat, lf_target, geom):
    """
    PSNR of every rendered view against its target, over the rays that hit both panels.

    Args:
        pat (PatternSet): Front and rear frames
        lf_target (LightFieldTarget): Target light field
        geom (DisplayGeometry): Display layout

    Returns:
        list: dB per view, in grid order
    """
    view_geom = lightfield_geometry(geom)
    scores = []
    for v, nu in enumerate(lf_target.grid.angles(view_geom)):
        rendered = render_view(pat, view_geom, nu)
        scores.append(psnr(rendered.values, lf_target.view_values[v], mask=lf_target.view_masks[v]))
    return scores


def target_objective(lf_target, pat):
    """Weighted factorization error of a pattern set against a light field target."""
    return factorization_objective(lf_target.lightfield, pat.front, pat.rear)
