import numpy as np
import pytest

from charts import chart_by_name, checkerboard, chirp, natural_scene, parallax_views, slanted_edge
from constants import *
from core import ViewGrid
from errors import InvalidArgumentError


def test_slanted_edge_sides():
    edge = slanted_edge(32, 32, angle=5.0).values
    assert edge.min() >= EDGE_LOW and edge.max() <= EDGE_HIGH
    assert edge[16, 0] == pytest.approx(EDGE_LOW)
    assert edge[16, -1] == pytest.approx(EDGE_HIGH)


def test_vertical_edge_is_column_constant():
    edge = slanted_edge(8, 8, angle=0.0, low=0.0, high=1.0).values
    np.testing.assert_array_equal(edge, np.tile(edge[0], (8, 1)))
    np.testing.assert_allclose(edge[0], [0, 0, 0, 0, 1, 1, 1, 1])


def test_blurred_edge_is_symmetric():
    edge = slanted_edge(16, 16, angle=0.0, blur_sigma=1.5, low=0.0, high=1.0).values[0]
    np.testing.assert_allclose(edge, 1.0 - edge[::-1], atol=1e-12)
    assert np.all(np.diff(edge) > 0)


def test_chirp_sweeps_frequency():
    image = chirp(4, 64, max_freq=2.0, scale=2.0).values
    assert image.shape == (4, 64)
    assert image.min() >= 0.0 and image.max() <= 1.0
    assert image[0, 0] == pytest.approx(1.0, abs=1e-3)
    np.testing.assert_array_equal(image[0], image[3])
    with pytest.raises(InvalidArgumentError):
        chirp(4, 4, max_freq=0.0)


def test_checkerboard():
    board = checkerboard(4, 4, cell=1).values
    np.testing.assert_array_equal(board[0], [0, 1, 0, 1])
    np.testing.assert_array_equal(board[1], [1, 0, 1, 0])
    coarse = checkerboard(4, 4, cell=2).values
    np.testing.assert_array_equal(coarse[:, 0], [0, 0, 1, 1])
    with pytest.raises(InvalidArgumentError):
        checkerboard(4, 4, cell=0)


def test_natural_scene_is_seeded():
    a = natural_scene(20, 24, seed=5).values
    np.testing.assert_array_equal(a, natural_scene(20, 24, seed=5).values)
    assert not np.array_equal(a, natural_scene(20, 24, seed=6).values)
    assert a.min() == pytest.approx(0.1) and a.max() == pytest.approx(0.9)


def test_parallax_views_move_foreground():
    grid = ViewGrid(cols=3, rows=1)
    views = parallax_views((16, 16), grid, seed=1, near_disparity=1)
    assert len(views) == 3
    left, center, right = (v.values for v in views)
    np.testing.assert_array_equal(np.roll(center, -1, axis=1)[4:12, 4:11], left[4:12, 4:11])
    np.testing.assert_array_equal(center[0], left[0])
    assert not np.array_equal(left, right)


def test_chart_by_name():
    assert chart_by_name("checkerboard", 4, 6, cell=2).shape == (4, 6)
    assert chart_by_name("scene", 10, 10).shape == (10, 10)
    with pytest.raises(InvalidArgumentError):
        chart_by_name("zoneplate")
