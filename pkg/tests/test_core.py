import math

import numpy as np
import pytest

from constants import *
from core import (ActiveSupport, DiffuserModel, DisplayGeometry, ImagePlane, LightFieldVar,
                  MaskedLightField, PatternSet, SolverConfig, ViewGrid, degrees_of_freedom_ratio,
                  diffuser_footprints, diffuser_integral, diffuser_weight, max_rank_for_refresh)
from errors import DimensionError, InvalidArgumentError


class TestDisplayGeometry:
    def test_target_resolution(self, small_geom):
        assert small_geom.panel_shape == (8, 8)
        assert small_geom.panel_count == 64
        assert small_geom.target_shape == (16, 16)
        assert small_geom.target_count == 256

    def test_fractional_factor_rounds(self):
        geom = DisplayGeometry(panel_cols=10, panel_rows=6, sr_factor=1.5)
        assert geom.target_shape == (9, 15)

    @pytest.mark.parametrize("field,value", [
        ("panel_pitch", 0.0),
        ("gap_panels", -1.0),
        ("gap_diffuser", -0.1),
        ("sr_factor", 0.5),
        ("panel_cols", 0),
    ])
    def test_rejects_invalid_fields(self, field, value):
        with pytest.raises(InvalidArgumentError):
            DisplayGeometry(**{field: value})

    def test_describe_changes_with_geometry(self, small_geom):
        other = DisplayGeometry(panel_cols=8, panel_rows=8, panel_pitch=0.5, gap_panels=2.0,
                                gap_diffuser=1.0, sr_factor=2.0)
        assert small_geom.describe() != other.describe()


class TestDiffuser:
    def test_cosine_profile(self):
        model = DiffuserModel(half_angle=10.0)
        assert diffuser_weight(model, 0.0) == pytest.approx(1.0)
        assert diffuser_weight(model, 5.0) == pytest.approx(math.cos(math.pi / 4))
        assert diffuser_weight(model, 10.0) == 0.0
        assert diffuser_weight(model, -25.0) == 0.0

    def test_weight_nonincreasing_in_angle(self):
        model = DiffuserModel(half_angle=7.5)
        weights = diffuser_weight(model, np.linspace(0, 10, 41))
        assert np.all(np.diff(weights) <= 1e-15)

    def test_uniform_profile(self):
        model = DiffuserModel(half_angle=5.0, profile=PROFILE_UNIFORM)
        np.testing.assert_array_equal(diffuser_weight(model, np.array([-4.9, 0.0, 4.9, 5.0])),
                                      [1.0, 1.0, 1.0, 0.0])

    def test_non_finite_angle(self):
        with pytest.raises(InvalidArgumentError):
            diffuser_weight(DiffuserModel(), float("nan"))

    @pytest.mark.parametrize("kwargs", [
        {"half_angle": 0.0},
        {"half_angle": 90.0},
        {"profile": "gaussian"},
        {"angular_samples": 1},
    ])
    def test_rejects_invalid_model(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            DiffuserModel(**kwargs)

    def test_footprints(self, small_geom):
        s1, s2 = diffuser_footprints(small_geom, DiffuserModel(half_angle=7.5))
        spread = math.tan(math.radians(7.5))
        assert s1 == pytest.approx(2 * 0.3 * spread)
        assert s2 == pytest.approx(2 * 2.3 * spread)
        assert s2 >= s1 >= 0

    def test_midpoint_samples(self):
        angles, weights = DiffuserModel(half_angle=7.5).sample_angles(4)
        np.testing.assert_allclose(angles, [-5.625, -1.875, 1.875, 5.625])
        assert np.all(weights > 0)
        np.testing.assert_allclose(weights, weights[::-1])

    def test_integral_is_antiderivative_of_weight(self):
        model = DiffuserModel(half_angle=7.5)
        theta = np.linspace(-7.0, 7.0, 15)
        step = 1e-5
        slope = (diffuser_integral(model, theta + step) - diffuser_integral(model, theta - step)) / (2 * step)
        np.testing.assert_allclose(slope, diffuser_weight(model, theta), rtol=1e-6)

    @pytest.mark.parametrize("profile,total", [
        (PROFILE_COSINE, 4 * 7.5 / math.pi),
        (PROFILE_UNIFORM, 2 * 7.5),
    ])
    def test_integral_over_field_of_view(self, profile, total):
        model = DiffuserModel(half_angle=7.5, profile=profile)
        assert diffuser_integral(model, -7.5) == pytest.approx(0.0)
        assert diffuser_integral(model, 7.5) == pytest.approx(total)
        assert diffuser_integral(model, 40.0) == pytest.approx(total)
        assert isinstance(diffuser_integral(model, 0.0), float)


class TestImagePlane:
    def test_channels_split_and_merge(self, rng):
        rgb = ImagePlane(rng.uniform(size=(3, 4, 3)))
        planes = rgb.split_channels()
        assert [p.channels for p in planes] == [1, 1, 1]
        np.testing.assert_array_equal(ImagePlane.merge_channels(planes).values, rgb.values)
        np.testing.assert_allclose(rgb.to_gray().values, rgb.values.mean(axis=2))

    def test_single_channel_axis_dropped(self):
        image = ImagePlane(np.zeros((2, 3, 1)))
        assert image.channels == 1
        assert image.shape == (2, 3)

    def test_values_are_read_only(self):
        image = ImagePlane(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            image.values[0, 0] = 1.0

    def test_clamped(self):
        image = ImagePlane(np.array([[-0.5, 0.5, 1.5]]))
        np.testing.assert_array_equal(image.clamped().values, [[0.0, 0.5, 1.0]])

    def test_rejects_bad_input(self):
        with pytest.raises(DimensionError):
            ImagePlane(np.zeros(4))
        with pytest.raises(DimensionError):
            ImagePlane(np.zeros((2, 2, 2)))
        with pytest.raises(InvalidArgumentError):
            ImagePlane(np.array([[np.inf]]))


class TestPatternSet:
    def test_frames(self, rng):
        front = rng.uniform(size=(6, 2))
        rear = rng.uniform(size=(6, 2))
        pat = PatternSet(front, rear, 0.0, (2, 3))
        assert pat.rank == 2
        f1, g1 = pat.frame(1)
        assert f1.shape == (2, 3)
        np.testing.assert_array_equal(g1.values.ravel(), rear[:, 1])

    def test_vector_is_one_frame(self):
        pat = PatternSet(np.full(4, 0.5), np.full(4, 0.5))
        assert pat.rank == 1
        assert pat.panel_shape == (1, 4)

    def test_respects_lower_bound(self):
        with pytest.raises(InvalidArgumentError):
            PatternSet(np.full((4, 1), 0.1), np.full((4, 1), 0.5), lower_bound=0.15)
        with pytest.raises(InvalidArgumentError):
            PatternSet(np.full((4, 1), 1.2), np.full((4, 1), 0.5))

    def test_shape_errors(self):
        with pytest.raises(DimensionError):
            PatternSet(np.ones((4, 2)), np.ones((4, 1)))
        with pytest.raises(DimensionError):
            PatternSet(np.ones((4, 1)), np.ones((4, 1)), panel_shape=(3, 3))


class TestActiveSupport:
    def test_full_support(self):
        support = ActiveSupport.full(3)
        assert len(support) == 9
        assert support.front.tolist() == [0, 0, 0, 1, 1, 1, 2, 2, 2]
        assert support.rear.tolist() == [0, 1, 2] * 3

    def test_outer_mean_matches_matrix_product(self, rng):
        front, rear = rng.uniform(size=(5, 3)), rng.uniform(size=(5, 3))
        support = ActiveSupport([0, 4, 2], [1, 3, 2], 5)
        dense = front @ rear.T / 3
        np.testing.assert_allclose(support.outer_mean(front, rear), dense[[0, 4, 2], [1, 3, 2]])

    def test_scatter(self):
        support = ActiveSupport([0, 1], [1, 0], 2)
        np.testing.assert_array_equal(support.scatter([2.0, 3.0]), [[0.0, 2.0], [3.0, 0.0]])

    def test_rejects_pairs_outside_panel(self):
        with pytest.raises(InvalidArgumentError):
            ActiveSupport([0, 3], [0, 0], 3)


class TestMaskedLightField:
    def test_zero_weights_are_inactive(self):
        matrix = np.arange(4.0).reshape(2, 2)
        weights = np.array([[1.0, 0.0], [2.0, 1.0]])
        lf = MaskedLightField.from_dense(matrix, weights)
        assert len(lf.support) == 3
        np.testing.assert_array_equal(lf.weights, [1.0, 2.0, 1.0])
        np.testing.assert_array_equal(lf.to_dense(), [[0.0, 0.0], [2.0, 3.0]])

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            MaskedLightField.from_dense(np.zeros((2, 3)))


def test_light_field_var_requires_finite_dual():
    with pytest.raises(InvalidArgumentError):
        LightFieldVar(np.zeros(3), np.array([0.0, np.nan]), 1.0)


@pytest.mark.parametrize("light_field", [np.array([0.5, np.nan]), np.array([0.5, -0.1])])
def test_light_field_var_rejects_invalid_values(light_field):
    with pytest.raises(InvalidArgumentError):
        LightFieldVar(light_field, np.zeros(2), 1.0)


def test_light_field_var_must_be_a_vector():
    with pytest.raises(DimensionError):
        LightFieldVar(np.zeros((2, 2)), np.zeros(4), 1.0)


def test_light_field_var_as_matrix():
    state = LightFieldVar(np.array([2.0, 3.0]), np.zeros(4), 1.0)
    support = ActiveSupport([1, 0], [0, 1], 2)
    np.testing.assert_array_equal(state.as_matrix(support), [[0.0, 3.0], [2.0, 0.0]])


@pytest.mark.parametrize("kwargs", [
    {"outer_iters": 0},
    {"sart_iters": 0},
    {"tol_primal": 0.0},
    {"relaxation": 0.0},
    {"relaxation": 2.5},
    {"rho": 0.0},
    {"refine_iters": -1},
])
def test_solver_config_validation(kwargs):
    with pytest.raises(InvalidArgumentError):
        SolverConfig(**kwargs)


class TestViewGrid:
    def test_shifts_centered(self, grid):
        shifts = grid.shifts()
        assert grid.count == 15
        assert shifts[7] == (0, 0)
        assert shifts[0] == (-1, -2)
        assert shifts[-1] == (1, 2)

    def test_angles(self, grid, small_geom):
        angles = grid.angles(small_geom)
        unit = math.degrees(math.atan(small_geom.panel_pitch / small_geom.gap_panels))
        assert angles[7] == (0.0, 0.0)
        assert angles[8] == pytest.approx((unit, 0.0))
        assert angles[0] == pytest.approx((-2 * math.degrees(math.atan(2 * 0.5 / 2.0)), -unit))

    def test_empty_grid(self):
        assert ViewGrid(cols=0, rows=0).count == 0


@pytest.mark.parametrize("refresh,rank", [(120, 4), (240, 8), (60, 2), (45, 1), (10, 1)])
def test_max_rank_for_refresh(refresh, rank):
    assert max_rank_for_refresh(refresh) == rank


def test_max_rank_rejects_nonpositive_rate():
    with pytest.raises(InvalidArgumentError):
        max_rank_for_refresh(0)


def test_degrees_of_freedom_ratio(small_geom):
    assert degrees_of_freedom_ratio(small_geom, 4) == pytest.approx(2.0)
    assert degrees_of_freedom_ratio(small_geom, 1) == pytest.approx(0.5)
