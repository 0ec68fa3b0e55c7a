import math

import numpy as np
import pytest

from constants import PSNR_CAP
from core import ImagePlane
from errors import DimensionError
from metrics import mean_squared_error, psnr


def direct_psnr(a, b):
    total = 0.0
    count = 0
    for x, y in zip(np.ravel(a), np.ravel(b)):
        total += (x - y) ** 2
        count += 1
    return 10.0 * math.log10(count / total)


def test_identical_images_are_capped():
    image = ImagePlane(np.full((4, 4), 0.3))
    assert psnr(image, image) == PSNR_CAP


def test_known_error():
    a = np.zeros((3, 3))
    b = np.full((3, 3), 0.1)
    assert mean_squared_error(a, b) == pytest.approx(0.01)
    assert psnr(a, b) == pytest.approx(20.0)


def test_matches_direct_summation():
    rng = np.random.default_rng(8)
    for _ in range(5):
        a = rng.uniform(size=(7, 5))
        b = rng.uniform(size=(7, 5))
        assert psnr(ImagePlane(a), ImagePlane(b)) == pytest.approx(direct_psnr(a, b), abs=1e-9)


def test_mask_selects_pixels():
    a = np.zeros((2, 2))
    b = np.array([[0.1, 5.0], [0.1, 5.0]])
    mask = np.array([[True, False], [True, False]])
    assert psnr(a, b, mask) == pytest.approx(20.0)
    assert mean_squared_error(a, b, np.zeros((2, 2), dtype=bool)) == 0.0


def test_mask_applies_to_every_channel():
    a = np.zeros((2, 2, 3))
    b = np.zeros((2, 2, 3))
    b[1] = 1.0
    mask = np.array([[True, True], [False, False]])
    assert psnr(a, b, mask) == PSNR_CAP


def test_shape_mismatch():
    with pytest.raises(DimensionError):
        psnr(np.zeros((2, 2)), np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        psnr(np.zeros((2, 2)), np.zeros((2, 2)), mask=np.ones((3, 3), dtype=bool))
