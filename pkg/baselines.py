"""
Baseline Upsampling Methods

Reference renditions a superresolution display is compared against:

- native: one panel showing the box-filtered target (see forward_model)
- cubic: the box-filtered target upsampled with a cubic spline
- wobulation: K low-resolution subframes shown at different subpixel
  offsets and averaged by the eye

Author: CodeWithEzeh
Date: November 2025
"""

import logging

import numpy as np
from scipy import ndimage

from constants import *
from core import ImagePlane
from errors import DimensionError, InvalidArgumentError
from forward_model import downsample_to_panel

logger = logging.getLogger(__name__)


def baseline_cubic(target, geom):
    """
    Box-downsample a target to panel resolution, then cubic-upsample it back.

    Args:
        target (ImagePlane): Image at target resolution
        geom (DisplayGeometry): Display layout

    Returns:
        ImagePlane: Image at target resolution
    """
    if target.shape != geom.target_shape:
        raise DimensionError(f"target is {target.shape}, geometry expects {geom.target_shape}")
    if geom.target_shape == geom.panel_shape:
        return ImagePlane(target.values)
    panel = downsample_to_panel(target, geom).values
    # Superpixel centers in panel pixel coordinates
    ry = (np.arange(geom.target_rows) + 0.5) * geom.panel_rows / geom.target_rows - 0.5
    rx = (np.arange(geom.target_cols) + 0.5) * geom.panel_cols / geom.target_cols - 0.5
    grid_y, grid_x = np.meshgrid(ry, rx, indexing="ij")

    def upsample(plane):
        return ndimage.map_coordinates(plane, [grid_y, grid_x], order=3, mode="nearest")

    if panel.ndim == 2:
        return ImagePlane(upsample(panel))
    return ImagePlane(np.stack([upsample(panel[:, :, c]) for c in range(panel.shape[2])], axis=2))


def wobulation_phases(K, sr):
    """
    K distinct subpixel offsets out of the sr x sr phase grid.

    Phase index i maps to (i // s, (i % s + i // s) % s); evenly spaced indices
    then cover both axes, giving the diagonal for K <= s and every phase for
    K = s^2.

    Args:
        K (int): Number of subframes
        sr (int): Superpixels per panel pixel

    Returns:
        list: (offset_rows, offset_cols) in superpixels
    """
    total = sr * sr
    if K < 1:
        raise InvalidArgumentError(f"wobulation needs K >= 1, got {K}")
    if K > total:
        raise InvalidArgumentError(f"K={K} exceeds the {total} distinct phases of a {sr}x factor")
    phases = []
    for k in range(K):
        i = k * total // K
        phases.append((i // sr, (i % sr + i // sr) % sr))
    return phases


def integer_factor(geom):
    """
    The superresolution factor as an int, or None when it is fractional.

    Args:
        geom (DisplayGeometry): Display layout

    Returns:
        int or None
    """
    sr = int(round(geom.sr_factor))
    return sr if abs(geom.sr_factor - sr) <= FACTOR_TOLERANCE else None


def _shift_matrix(n_target, n_panel, sr, offset):
    """Nearest replication of panel pixels shifted by `offset` superpixels; indices clamp at the border."""
    idx = np.clip(np.floor((np.arange(n_target) - offset) / sr).astype(np.int64), 0, n_panel - 1)
    mat = np.zeros((n_target, n_panel))
    mat[np.arange(n_target), idx] = 1.0
    return mat


class WobulationDisplay:
    """
    A single panel shown at K subpixel offsets within one perceived frame.

    perceived = (1/K) sum_k U_y(k) S_k U_x(k)^T, where S_k is subframe k at panel
    resolution and U(k) replicates panel pixels onto the shifted target grid.
    """

    def __init__(self, geom, K, phases=None):
        """
        Args:
            geom (DisplayGeometry): Display layout
            K (int): Number of subframes
            phases (list): Optional explicit (rows, cols) offsets
        """
        self.geom = geom
        self.sr = integer_factor(geom)
        if self.sr is None:
            raise InvalidArgumentError(f"wobulation shifts by whole superpixels; "
                                       f"sr_factor {geom.sr_factor} is not an integer")
        self.phases = list(phases) if phases is not None else wobulation_phases(K, self.sr)
        if len(self.phases) != K:
            raise InvalidArgumentError(f"{len(self.phases)} phases given for K={K}")
        self.K = K
        self._rows = [_shift_matrix(geom.target_rows, geom.panel_rows, self.sr, p[0]) for p in self.phases]
        self._cols = [_shift_matrix(geom.target_cols, geom.panel_cols, self.sr, p[1]) for p in self.phases]

    def render(self, subframes):
        """
        Perceived image of K subframes.

        Args:
            subframes (ndarray): K x panel_rows x panel_cols

        Returns:
            ndarray: Image at target resolution
        """
        out = np.zeros(self.geom.target_shape)
        for k in range(self.K):
            out += self._rows[k] @ subframes[k] @ self._cols[k].T
        return out / self.K

    def adjoint(self, residual):
        return np.stack([self._rows[k].T @ residual @ self._cols[k] for k in range(self.K)]) / self.K

    def solve(self, target, iters=WOBULATION_ITERS):
        """
        Least-squares subframes bounded to [0, 1].

        Projected gradient with every step divided by the column sums of the
        operator; its rows sum to one, so the step never increases the error.

        Args:
            target (ndarray): Image at target resolution
            iters (int): Iterations

        Returns:
            ndarray: K x panel_rows x panel_cols subframes
        """
        scaling = self.adjoint(np.ones(self.geom.target_shape))
        scaling = np.where(scaling > 0, scaling, 1.0)
        start = downsample_to_panel(ImagePlane(target), self.geom).values
        subframes = np.repeat(start[None], self.K, axis=0)
        for _ in range(iters):
            grad = self.adjoint(self.render(subframes) - target)
            subframes = np.clip(subframes - grad / scaling, 0.0, 1.0)
        return subframes


def baseline_wobulation(target, K, geom, iters=WOBULATION_ITERS, phases=None):
    """
    Perceived image of a K-subframe wobulation display for a target.

    Args:
        target (ImagePlane): Image at target resolution
        K (int): Number of subframes
        geom (DisplayGeometry): Display layout
        iters (int): Subframe solver iterations
        phases (list): Optional explicit offsets in superpixels

    Returns:
        ImagePlane: Image at target resolution
    """
    if K < 1:
        raise InvalidArgumentError(f"wobulation needs K >= 1, got {K}")
    if target.shape != geom.target_shape:
        raise DimensionError(f"target is {target.shape}, geometry expects {geom.target_shape}")
    display = WobulationDisplay(geom, K, phases)
    planes = []
    for plane in target.split_channels():
        subframes = display.solve(plane.values, iters)
        planes.append(ImagePlane(display.render(subframes)))
    logger.debug("wobulation with %d subframes at phases %s", K, display.phases)
    return ImagePlane.merge_channels(planes)
