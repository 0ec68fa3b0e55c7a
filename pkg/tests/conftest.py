"""Shared fixtures: small display geometries, fast solver schedules and seeded scenes."""

import numpy as np
import pytest

from charts import natural_scene
from core import DiffuserModel, DisplayGeometry, PatternSet, SolverConfig, ViewGrid
from forward_model import build_projection


@pytest.fixture
def small_geom():
    """8 x 8 panels, 2x superresolution, diffuser close to the front panel."""
    return DisplayGeometry(panel_cols=8, panel_rows=8, panel_pitch=0.5, gap_panels=2.0,
                           gap_diffuser=0.3, sr_factor=2.0)


@pytest.fixture
def tiny_geom():
    """4 x 4 panels, 2x superresolution; small enough for dense oracles."""
    return DisplayGeometry(panel_cols=4, panel_rows=4, panel_pitch=0.5, gap_panels=2.0,
                           gap_diffuser=0.3, sr_factor=2.0)


@pytest.fixture
def model():
    return DiffuserModel(half_angle=7.5)


@pytest.fixture
def small_projection(small_geom, model):
    return build_projection(small_geom, model)


@pytest.fixture
def tiny_projection(tiny_geom, model):
    return build_projection(tiny_geom, model)


@pytest.fixture
def fast_cfg():
    return SolverConfig(outer_iters=20, sart_iters=3, seed=0)


@pytest.fixture
def scene(small_geom):
    """Smooth seeded scene at the target resolution of small_geom."""
    return natural_scene(small_geom.target_rows, small_geom.target_cols, seed=3)


@pytest.fixture
def grid():
    return ViewGrid(cols=5, rows=3, spacing=1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_patterns(rng, panel_shape, rank, low=0.2, high=1.0, lower=0.0):
    """Seeded pattern set with every value in [low, high]."""
    m = panel_shape[0] * panel_shape[1]
    front = rng.uniform(low, high, size=(m, rank))
    rear = rng.uniform(low, high, size=(m, rank))
    return PatternSet(front, rear, lower, panel_shape)
