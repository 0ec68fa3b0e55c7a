"""
Image Metrics

Peak signal-to-noise ratio for images in [0, 1]. Shared by the solver's
per-iteration diagnostics and the analysis sweeps.

Author: CodeWithEzeh
Date: November 2025
"""

import numpy as np

from constants import *
from core import ImagePlane
from errors import DimensionError


def _values(image):
    return image.values if isinstance(image, ImagePlane) else np.asarray(image, dtype=np.float64)


def mean_squared_error(a, b, mask=None):
    """
    Mean squared difference of two images.

    Args:
        a (ImagePlane or ndarray): First image
        b (ImagePlane or ndarray): Second image
        mask (ndarray): Optional boolean mask of the pixels to compare

    Returns:
        float
    """
    va, vb = _values(a), _values(b)
    if va.shape != vb.shape:
        raise DimensionError(f"cannot compare images of shape {va.shape} and {vb.shape}")
    diff = (va - vb) ** 2
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != va.shape[:mask.ndim]:
            raise DimensionError(f"mask {mask.shape} does not match image {va.shape}")
        diff = diff[mask]
        if diff.size == 0:
            return 0.0
    return float(np.mean(diff))


def psnr(a, b, mask=None):
    """
    Peak signal-to-noise ratio 10 log10(1 / MSE) in dB, for a peak of 1.

    Identical images return PSNR_CAP.

    Args:
        a (ImagePlane or ndarray): First image
        b (ImagePlane or ndarray): Second image
        mask (ndarray): Optional boolean mask of the pixels to compare

    Returns:
        float: dB
    """
    mse = mean_squared_error(a, b, mask)
    if mse <= 0:
        return PSNR_CAP
    return float(min(PSNR_CAP, 10.0 * np.log10(1.0 / mse)))
