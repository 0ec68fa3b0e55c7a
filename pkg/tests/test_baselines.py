import numpy as np
import pytest

from baselines import (WobulationDisplay, baseline_cubic, baseline_wobulation, integer_factor,
                       wobulation_phases)
from charts import natural_scene
from core import DisplayGeometry, ImagePlane
from errors import DimensionError, InvalidArgumentError
from forward_model import simulate_native
from metrics import psnr


@pytest.mark.parametrize("K,sr,expected", [
    (1, 2, [(0, 0)]),
    (2, 2, [(0, 0), (1, 1)]),
    (3, 3, [(0, 0), (1, 1), (2, 2)]),
    (4, 2, [(0, 0), (0, 1), (1, 1), (1, 0)]),
])
def test_wobulation_phases(K, sr, expected):
    assert wobulation_phases(K, sr) == expected


def test_full_phase_set_covers_grid():
    assert sorted(wobulation_phases(9, 3)) == [(r, c) for r in range(3) for c in range(3)]


@pytest.mark.parametrize("K", [0, 5])
def test_wobulation_phase_limits(K):
    with pytest.raises(InvalidArgumentError):
        wobulation_phases(K, 2)


def test_single_subframe_is_native(small_geom, scene):
    np.testing.assert_allclose(baseline_wobulation(scene, 1, small_geom).values,
                               simulate_native(scene, small_geom).values, atol=1e-9)


def test_render_and_adjoint_agree(small_geom, rng):
    display = WobulationDisplay(small_geom, 4)
    subframes = rng.uniform(size=(4,) + small_geom.panel_shape)
    residual = rng.standard_normal(small_geom.target_shape)
    lhs = np.sum(display.render(subframes) * residual)
    rhs = np.sum(subframes * display.adjoint(residual))
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_fractional_factor_is_rejected():
    geom = DisplayGeometry(panel_cols=8, panel_rows=8, panel_pitch=0.5, gap_panels=2.0,
                           gap_diffuser=0.3, sr_factor=1.5)
    assert integer_factor(geom) is None
    with pytest.raises(InvalidArgumentError):
        WobulationDisplay(geom, 2)
    with pytest.raises(InvalidArgumentError):
        baseline_wobulation(ImagePlane(np.zeros(geom.target_shape)), 2, geom)


def test_integer_factor(small_geom):
    assert integer_factor(small_geom) == 2
    assert isinstance(integer_factor(small_geom), int)


def test_explicit_phases(small_geom):
    display = WobulationDisplay(small_geom, 2, phases=[(0, 0), (0, 1)])
    assert display.phases == [(0, 0), (0, 1)]
    with pytest.raises(InvalidArgumentError):
        WobulationDisplay(small_geom, 3, phases=[(0, 0)])


@pytest.mark.slow
def test_full_phase_wobulation_beats_native():
    geom = DisplayGeometry(panel_cols=12, panel_rows=12, panel_pitch=0.5, gap_panels=2.0,
                           gap_diffuser=0.3, sr_factor=2.0)
    target = natural_scene(geom.target_rows, geom.target_cols, seed=1, sigma=4.0)
    wobulated = baseline_wobulation(target, 4, geom, iters=1000)
    assert psnr(wobulated, target) >= 30.0
    assert psnr(wobulated, target) > psnr(simulate_native(target, geom), target)


def test_colour_wobulation(small_geom, scene):
    rgb = ImagePlane(np.stack([scene.values] * 3, axis=2))
    out = baseline_wobulation(rgb, 2, small_geom, iters=5)
    assert out.channels == 3
    np.testing.assert_array_equal(out.values[:, :, 0], out.values[:, :, 1])


def test_wobulation_size_check(small_geom):
    with pytest.raises(DimensionError):
        baseline_wobulation(ImagePlane(np.zeros((8, 8))), 1, small_geom)


def test_cubic_keeps_constants(small_geom):
    flat = ImagePlane(np.full(small_geom.target_shape, 0.4))
    np.testing.assert_allclose(baseline_cubic(flat, small_geom).values, 0.4, atol=1e-12)


def test_cubic_is_identity_without_superresolution(scene):
    geom = DisplayGeometry(panel_cols=16, panel_rows=16, sr_factor=1.0)
    np.testing.assert_array_equal(baseline_cubic(scene, geom).values, scene.values)


def test_cubic_interpolates_linear_ramp(small_geom):
    ramp = np.tile(np.linspace(0.1, 0.9, small_geom.target_cols), (small_geom.target_rows, 1))
    out = baseline_cubic(ImagePlane(ramp), small_geom).values
    np.testing.assert_allclose(out[:, 4:-4], ramp[:, 4:-4], atol=0.02)


def test_cubic_size_check(small_geom):
    with pytest.raises(DimensionError):
        baseline_cubic(ImagePlane(np.zeros((4, 4))), small_geom)
