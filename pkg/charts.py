"""
Test Charts

Deterministic test images for the analyses and the `chart` command:
slanted edges, chirps, checkerboards, smooth natural-looking scenes and a
two-plane parallax scene for the 3D mode.

Author: CodeWithEzeh
Date: November 2025
"""

import math

import numpy as np
from scipy import ndimage
from scipy.special import erf

from constants import *
from core import ImagePlane
from errors import InvalidArgumentError


def slanted_edge(rows=CHART_SIZE, cols=CHART_SIZE, angle=EDGE_SLANT, blur_sigma=0.0,
                 low=EDGE_LOW, high=EDGE_HIGH):
    """
    Near-vertical edge through the image center, tilted `angle` degrees.

    With blur_sigma > 0 the edge profile is a Gaussian-blurred step sampled at
    pixel centers; otherwise each pixel takes its covered area, approximated
    along the edge normal.

    Args:
        rows (int): Image rows
        cols (int): Image columns
        angle (float): Tilt from vertical in degrees
        blur_sigma (float): Gaussian blur in pixels
        low (float): Value left of the edge
        high (float): Value right of the edge

    Returns:
        ImagePlane
    """
    theta = math.radians(angle)
    ys, xs = np.meshgrid(np.arange(rows) + 0.5, np.arange(cols) + 0.5, indexing="ij")
    dist = (xs - cols / 2.0) * math.cos(theta) - (ys - rows / 2.0) * math.sin(theta)
    if blur_sigma > 0:
        step = 0.5 * (1.0 + erf(dist / (blur_sigma * math.sqrt(2.0))))
    else:
        step = np.clip(dist + 0.5, 0.0, 1.0)
    return ImagePlane(low + (high - low) * step)


def chirp(rows=CHART_SIZE, cols=CHART_SIZE, max_freq=None, scale=SR_FACTOR, low=0.0, high=1.0):
    """
    Horizontal linear chirp from DC up to `max_freq`.

    Frequencies are normalized so that the panel Nyquist limit is 1; with
    `scale` superpixels per panel pixel, a normalized frequency f is
    f / (2 * scale) cycles per superpixel.

    Args:
        rows (int): Image rows
        cols (int): Image columns
        max_freq (float): Normalized frequency at the right border, defaults to scale
        scale (float): Superpixels per panel pixel
        low (float): Minimum value
        high (float): Maximum value

    Returns:
        ImagePlane
    """
    if max_freq is None:
        max_freq = scale
    if max_freq <= 0:
        raise InvalidArgumentError("max_freq must be > 0")
    f_end = max_freq / (2.0 * scale)
    x = np.arange(cols) + 0.5
    phase = 2.0 * np.pi * f_end * x * x / (2.0 * cols)
    row = 0.5 * (1.0 + np.cos(phase))
    return ImagePlane(np.tile(low + (high - low) * row, (rows, 1)))


def checkerboard(rows=CHART_SIZE, cols=CHART_SIZE, cell=CHECKER_CELL, low=0.0, high=1.0):
    """Checkerboard with square cells of `cell` pixels, starting with `low` at the origin."""
    if cell < 1:
        raise InvalidArgumentError("cell must be >= 1")
    ys, xs = np.meshgrid(np.arange(rows) // cell, np.arange(cols) // cell, indexing="ij")
    return ImagePlane(np.where((ys + xs) % 2 == 0, low, high))


def natural_scene(rows=CHART_SIZE, cols=CHART_SIZE, seed=SEED, sigma=1.5, low=0.1, high=0.9):
    """
    Smooth random scene with detail at several scales.

    Args:
        rows (int): Image rows
        cols (int): Image columns
        seed (int): Seed of the generator
        sigma (float): Finest blur scale in pixels
        low (float): Minimum value
        high (float): Maximum value

    Returns:
        ImagePlane
    """
    rng = np.random.default_rng(seed)
    scene = np.zeros((rows, cols))
    for octave in range(3):
        noise = rng.standard_normal((rows, cols))
        scene += ndimage.gaussian_filter(noise, sigma * 2 ** octave, mode="reflect") * 2 ** octave
    span = scene.max() - scene.min()
    if span <= 0:
        return ImagePlane(np.full((rows, cols), 0.5 * (low + high)))
    return ImagePlane(low + (high - low) * (scene - scene.min()) / span)


def parallax_views(shape, grid, seed=SEED, near_disparity=1, low=0.1, high=0.9):
    """
    Views of a two-plane scene: a textured background in the front panel
    plane and a textured square floating in front of it.

    The background looks the same from every view; the square moves by
    near_disparity pixels per unit view shift.

    Args:
        shape (tuple): (rows, cols) of each view
        grid (ViewGrid): View directions
        seed (int): Seed of the generator
        near_disparity (int): Shift of the foreground per unit view shift
        low (float): Minimum value
        high (float): Maximum value

    Returns:
        list: One ImagePlane per view, in grid order
    """
    rows, cols = shape
    background = natural_scene(rows, cols, seed, sigma=2.0, low=low, high=0.5 * (low + high)).values
    foreground = natural_scene(rows, cols, seed + 1, sigma=1.0, low=0.5 * (low + high), high=high).values
    mask = np.zeros(shape, dtype=bool)
    mask[rows // 4: rows - rows // 4, cols // 4: cols - cols // 4] = True

    views = []
    for sy, sx in grid.shifts():
        dy, dx = sy * near_disparity, sx * near_disparity
        moved_mask = np.roll(mask, (dy, dx), axis=(0, 1))
        moved = np.roll(foreground, (dy, dx), axis=(0, 1))
        views.append(ImagePlane(np.where(moved_mask, moved, background)))
    return views


CHARTS = {
    "slanted_edge": slanted_edge,
    "chirp": chirp,
    "checkerboard": checkerboard,
    "scene": natural_scene,
}


def chart_by_name(name, rows=CHART_SIZE, cols=CHART_SIZE, **options):
    """
    Generate one of the named charts.

    Args:
        name (str): slanted_edge, chirp, checkerboard or scene
        rows (int): Image rows
        cols (int): Image columns
        **options: Keyword arguments of the chart function

    Returns:
        ImagePlane
    """
    try:
        make = CHARTS[name]
    except KeyError:
        raise InvalidArgumentError(f"unknown chart {name!r}; expected one of {', '.join(CHARTS)}") from None
    return make(rows, cols, **options)
