from dataclasses import replace

import numpy as np
import pytest

from conftest import random_patterns
from constants import *
from core import ImagePlane, LightFieldVar, SolverConfig
from errors import DimensionError, InvalidArgumentError, SolverDivergedError
from factorization import initial_patterns
from forward_model import apply_projection
from metrics import psnr
from solver import (IterationRecord, decompose_channels, decompose_superres, lightfield_objective,
                    refine_patterns, solve_lightfield_subproblem)


def subproblem_state(P, rng, rho=1.0):
    front, rear = initial_patterns(P.panel_count, 2, 0.0, seed=1)
    target = rng.uniform(0.1, 0.9, size=P.n_rows)
    dual = 0.05 * rng.standard_normal(P.n_rows)
    state = LightFieldVar(rng.uniform(size=P.n_active), dual, rho)
    return state, front, rear, target


def dense_oracle(P, factored, data, rho, iters=5000):
    """Projected gradient on the dense subproblem with a 1 / Lipschitz step."""
    A = P.to_sparse().toarray()
    hessian = np.eye(A.shape[1]) + rho * A.T @ A
    step = 1.0 / np.linalg.eigvalsh(hessian)[-1]
    x = np.zeros(A.shape[1])
    for _ in range(iters):
        grad = (x - factored) + rho * A.T @ (A @ x - data)
        x = np.maximum(0.0, x - step * grad)
    return x


class TestLightFieldStep:
    @pytest.mark.parametrize("relaxation", [0.5, 1.0, 2.0])
    def test_objective_does_not_increase(self, tiny_projection, rng, relaxation):
        P = tiny_projection
        state, front, rear, target = subproblem_state(P, rng)
        cfg = SolverConfig(sart_iters=1, relaxation=relaxation)
        factored = P.support.outer_mean(front, rear)
        data = target - state.dual
        previous = lightfield_objective(state.light_field, factored, P, data, state.rho)
        for _ in range(30):
            state = solve_lightfield_subproblem(state, front, rear, P, target, cfg)
            assert state.light_field.min() >= 0.0
            value = lightfield_objective(state.light_field, factored, P, data, state.rho)
            assert value <= previous + 1e-8
            previous = value

    def test_matches_dense_oracle(self, tiny_projection, rng):
        P = tiny_projection
        state, front, rear, target = subproblem_state(P, rng)
        cfg = SolverConfig(sart_iters=3000, relaxation=1.0)
        factored = P.support.outer_mean(front, rear)
        data = target - state.dual
        solved = solve_lightfield_subproblem(state, front, rear, P, target, cfg)
        oracle = dense_oracle(P, factored, data, state.rho)
        ours = lightfield_objective(solved.light_field, factored, P, data, state.rho)
        best = lightfield_objective(oracle, factored, P, data, state.rho)
        assert abs(ours - best) <= 1e-4

    def test_zero_rho_projects_onto_patterns(self, tiny_projection, rng):
        P = tiny_projection
        state, front, rear, target = subproblem_state(P, rng, rho=0.0)
        cfg = SolverConfig(sart_iters=1, relaxation=1.0)
        solved = solve_lightfield_subproblem(state, front, rear, P, target, cfg, allow_zero_rho=True)
        np.testing.assert_allclose(solved.light_field, P.support.outer_mean(front, rear), atol=1e-15)

    def test_zero_rho_needs_permission(self, tiny_projection, rng):
        state, front, rear, target = subproblem_state(tiny_projection, rng, rho=0.0)
        with pytest.raises(InvalidArgumentError):
            solve_lightfield_subproblem(state, front, rear, tiny_projection, target, SolverConfig())

    def test_keeps_dual(self, tiny_projection, rng):
        state, front, rear, target = subproblem_state(tiny_projection, rng)
        solved = solve_lightfield_subproblem(state, front, rear, tiny_projection, target, SolverConfig())
        np.testing.assert_array_equal(solved.dual, state.dual)

    def test_light_field_size_checked(self, tiny_projection, rng):
        state, front, rear, target = subproblem_state(tiny_projection, rng)
        short = LightFieldVar(state.light_field[:-1], state.dual, 1.0)
        with pytest.raises(DimensionError):
            solve_lightfield_subproblem(short, front, rear, tiny_projection, target, SolverConfig())


class TestDecompose:
    def test_patterns_and_diagnostics(self, small_projection, scene, fast_cfg):
        pat, diag = decompose_superres(scene, small_projection, 3, fast_cfg)
        assert pat.rank == 3
        assert pat.panel_shape == small_projection.panel_shape
        assert pat.front.min() >= 0.0 and pat.front.max() <= 1.0
        assert 1 <= diag.admm_iterations <= fast_cfg.outer_iters
        assert diag.iterations == diag.admm_iterations + fast_cfg.refine_iters
        assert [r.iteration for r in diag.records] == list(range(1, diag.iterations + 1))
        assert [r.stage for r in diag.records[:diag.admm_iterations]] == [STAGE_ADMM] * diag.admm_iterations
        assert diag.records[-1].stage == STAGE_REFINE
        numbers = np.array([row[:4] for row in diag.rows()], dtype=np.float64)
        assert np.isfinite(numbers).all()
        perceived = apply_projection(small_projection, pat)
        assert diag.final_psnr == pytest.approx(psnr(perceived, scene))

    def test_residual_and_quality_improve(self, small_projection, scene):
        cfg = SolverConfig(outer_iters=60, sart_iters=5, seed=0)
        _, diag = decompose_superres(scene, small_projection, 4, cfg)
        admm = [r for r in diag.records if r.stage == STAGE_ADMM]
        assert admm[-1].primal_residual <= admm[0].primal_residual
        assert admm[-1].psnr > admm[0].psnr
        assert diag.final_psnr >= admm[-1].psnr - 1e-9

    def test_refinement_can_be_switched_off(self, small_projection, scene, fast_cfg):
        _, diag = decompose_superres(scene, small_projection, 2, replace(fast_cfg, refine_iters=0))
        assert diag.iterations == diag.admm_iterations
        assert all(r.stage == STAGE_ADMM for r in diag.records)

    def test_seed_makes_runs_repeatable(self, small_projection, scene, fast_cfg):
        a, _ = decompose_superres(scene, small_projection, 2, fast_cfg)
        b, _ = decompose_superres(scene, small_projection, 2, fast_cfg)
        c, _ = decompose_superres(scene, small_projection, 2, replace(fast_cfg, seed=1))
        np.testing.assert_array_equal(a.front, b.front)
        np.testing.assert_array_equal(a.rear, b.rear)
        assert not np.array_equal(a.front, c.front)

    def test_lower_bound_and_unreachable_pixels(self, small_projection, scene, fast_cfg):
        values = scene.values.copy()
        values[:2, :3] = 0.0
        pat, diag = decompose_superres(ImagePlane(values), small_projection, 2, fast_cfg, lower=0.15)
        assert diag.unreachable_pixels == 6
        assert pat.lower_bound == 0.15
        assert pat.front.min() >= 0.15 and pat.rear.min() >= 0.15

    def test_warm_start(self, small_projection, scene, small_geom, rng):
        start = random_patterns(rng, small_geom.panel_shape, 2)
        cfg = SolverConfig(outer_iters=1, sart_iters=1)
        a, _ = decompose_superres(scene, small_projection, 2, cfg, init=(start.front, start.rear))
        b, _ = decompose_superres(scene, small_projection, 2, cfg)
        assert not np.array_equal(a.front, b.front)

    def test_non_finite_target_diverges(self, small_projection, fast_cfg):
        target = np.full(small_projection.target_shape, 0.5)
        target[3, 3] = np.nan
        with pytest.raises(SolverDivergedError) as info:
            decompose_superres(target, small_projection, 2, fast_cfg)
        assert info.value.iteration == 1

    def test_rejects_bad_inputs(self, small_projection, scene, fast_cfg):
        with pytest.raises(InvalidArgumentError):
            decompose_superres(scene, small_projection, 0, fast_cfg)
        with pytest.raises(DimensionError):
            decompose_superres(ImagePlane(np.zeros((8, 8))), small_projection, 1, fast_cfg)
        rgb = ImagePlane(np.stack([scene.values] * 3, axis=2))
        with pytest.raises(DimensionError):
            decompose_superres(rgb, small_projection, 1, fast_cfg)

    def test_colour_targets_per_channel(self, small_projection, scene, fast_cfg):
        rgb = ImagePlane(np.stack([scene.values, 1.0 - scene.values, scene.values], axis=2))
        patterns, diagnostics = decompose_channels(rgb, small_projection, 2, replace(fast_cfg, outer_iters=3))
        assert len(patterns) == 3 and len(diagnostics) == 3
        np.testing.assert_array_equal(patterns[0].front, patterns[2].front)


class TestRefinePatterns:
    def test_image_error_never_increases(self, small_projection, scene):
        front, rear = initial_patterns(small_projection.panel_count, 2, 0.0, seed=4)
        records = []
        front, rear = refine_patterns(scene, small_projection, front, rear, iters=40, records=records)
        errors = [r.primal_residual for r in records]
        assert all(b <= a + 1e-12 for a, b in zip(errors, errors[1:]))
        assert [r.stage for r in records] == [STAGE_REFINE] * 40
        assert front.min() >= 0.0 and rear.max() <= 1.0

    def test_records_continue_numbering(self, small_projection, scene):
        front, rear = initial_patterns(small_projection.panel_count, 1, 0.0, seed=0)
        records = [IterationRecord(1, 1.0, 0.0, 10.0), IterationRecord(2, 0.5, 0.0, 12.0)]
        refine_patterns(scene, small_projection, front, rear, iters=3, records=records)
        assert [r.iteration for r in records] == [1, 2, 3, 4, 5]

    def test_respects_lower_bound(self, small_projection, scene):
        front, rear = initial_patterns(small_projection.panel_count, 2, 0.3, seed=0)
        front, rear = refine_patterns(np.zeros(small_projection.target_shape), small_projection,
                                      front, rear, lower=0.3, iters=10)
        assert front.min() >= 0.3 and rear.min() >= 0.3


def test_planted_patterns_are_recovered(small_geom, small_projection):
    planted = random_patterns(np.random.default_rng(9), small_geom.panel_shape, 1, low=0.4, high=0.9)
    target = apply_projection(small_projection, planted)
    cfg = SolverConfig(outer_iters=100, sart_iters=5, refine_iters=100, seed=0)
    pat, diag = decompose_superres(target, small_projection, 1, cfg)
    assert diag.admm_iterations <= 200
    assert psnr(apply_projection(small_projection, pat), target) >= 60.0


def test_constant_target_at_rank_one(small_projection):
    target = np.full(small_projection.target_shape, 0.36)
    cfg = SolverConfig(outer_iters=200, sart_iters=5, refine_iters=200, seed=0)
    pat, _ = decompose_superres(target, small_projection, 1, cfg)
    np.testing.assert_allclose(apply_projection(small_projection, pat).values, 0.36, atol=1e-3)
