"""
Pattern Synthesis Solver

Decomposes a superresolved target image into K front/rear pattern pairs. The
light field L is introduced as a splitting variable, and the problem is solved
by alternating three steps (ADMM with scaled dual u):

    L      <- argmin_{L >= 0} ||(1/K) F G^T - L||^2 + rho ||P L - i + u||^2
    F, G   <- argmin_{b <= F, G <= 1} ||(1/K) F G^T - L||^2
    u      <- u + P L - i

The light field step runs relaxed SART sweeps on the stacked system
{sqrt(rho) P L = sqrt(rho) (i - u), L = (1/K) F G^T}, projecting onto L >= 0
after every sweep. The pattern step is the box-constrained factorization.

At a fixed point of this cycle P (1/K) F G^T still differs from i by a term
proportional to the dual, so the patterns are finished with refine_iters
multiplicative updates on the image error itself.

Author: CodeWithEzeh
Date: November 2025
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from constants import *
from core import ImagePlane, LightFieldVar, MaskedLightField, PatternSet
from errors import DimensionError, InvalidArgumentError, SolverDivergedError
from factorization import ImageFactorizer, factorize_box, initial_patterns
from metrics import psnr

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IterationRecord:
    """One row of the diagnostics stream."""

    iteration: int
    primal_residual: float
    fact_error: float
    psnr: float
    stage: str = STAGE_ADMM


@dataclass
class Diagnostics:
    """
    Progress of one decomposition.

    Attributes:
        records (list): One IterationRecord per ADMM iteration, then one per
            refinement step
        converged (bool): Primal residual dropped below tol_primal * ||i||
        unreachable_pixels (int): Target pixels darker than the dual-layer floor b^2
    """

    records: list = field(default_factory=list)
    converged: bool = False
    unreachable_pixels: int = 0
    rank: int = 0
    lower_bound: float = 0.0

    @property
    def iterations(self):
        """int: Rows of the diagnostics stream, ADMM and refinement together."""
        return len(self.records)

    @property
    def admm_iterations(self):
        return sum(1 for r in self.records if r.stage == STAGE_ADMM)

    @property
    def final_psnr(self):
        return self.records[-1].psnr if self.records else float("nan")

    @property
    def final_residual(self):
        return self.records[-1].primal_residual if self.records else float("nan")

    def rows(self):
        """
        Diagnostics as CSV-ready rows.

        Returns:
            list: [iter, primal_residual, fact_error, psnr, stage] per iteration
        """
        return [[r.iteration, r.primal_residual, r.fact_error, r.psnr, r.stage] for r in self.records]


def _target_vector(P, target):
    values = target.values if isinstance(target, ImagePlane) else np.asarray(target, dtype=np.float64)
    if values.ndim == 3:
        raise DimensionError("colour targets must be decomposed per channel (see decompose_channels)")
    values = values.ravel()
    if values.size != P.n_rows:
        raise DimensionError(f"target has {values.size} pixels, operator has {P.n_rows} rows")
    return values


def lightfield_objective(light_field, factored, P, data, rho):
    """
    Objective of the light field step: ||L - L_fg||^2 + rho ||P L - data||^2.

    Args:
        light_field (ndarray): L on the active support
        factored (ndarray): (1/K) F G^T on the active support
        P (ProjectionOperator): Projection operator
        data (ndarray): i - u
        rho (float): Penalty

    Returns:
        float
    """
    fit = light_field - factored
    res = P.matvec(light_field) - data
    return float(fit @ fit + rho * (res @ res))


def _sart_sweeps(light_field, factored, P, data, rho, cfg):
    """Relaxed, nonnegativity-projected sweeps of the light field step."""
    scaling = 1.0 + rho * P.rmatvec(P.row_sums())
    for _ in range(cfg.sart_iters):
        grad = (light_field - factored) + rho * P.rmatvec(P.matvec(light_field) - data)
        light_field = np.maximum(0.0, light_field - cfg.relaxation * grad / scaling)
    return light_field


def solve_lightfield_subproblem(state, front, rear, P, target, cfg, allow_zero_rho=False):
    """
    Light field step of the ADMM cycle.

    Every sweep is one simultaneous update of all active pairs,
    L <- max(0, L - relaxation * grad / D), with
    grad = (L - L_fg) + rho P^T (P L - (i - u)) and the diagonal scaling
    D = 1 + rho P^T (row sums of P). For row-normalized P this is the SART
    update of the stacked system. D dominates the Hessian of the objective,
    so the objective does not increase for any relaxation in (0, 2].

    Args:
        state (LightFieldVar): Current L and dual u
        front (ndarray): M x K front patterns
        rear (ndarray): M x K rear patterns
        P (ProjectionOperator): Projection operator
        target (ImagePlane or ndarray): Target image i
        cfg (SolverConfig): Sweep count and relaxation
        allow_zero_rho (bool): Accept rho == 0 (pure projection onto F G^T)

    Returns:
        LightFieldVar: Updated L, same dual
    """
    rho = state.rho
    if not (rho > 0 or (allow_zero_rho and rho == 0)):
        raise InvalidArgumentError(f"rho must be > 0, got {rho}")
    light_field = np.asarray(state.light_field, dtype=np.float64)
    if light_field.shape != (P.n_active,):
        raise DimensionError(f"light field has {light_field.shape} entries, operator has {P.n_active} pairs")
    data = _target_vector(P, target) - state.dual
    factored = P.support.outer_mean(front, rear)
    light_field = _sart_sweeps(light_field, factored, P, data, rho, cfg)
    return LightFieldVar(light_field, state.dual, rho)


def refine_patterns(target, P, front, rear, lower=0.0, iters=REFINE_ITERS, records=None):
    """
    Polish patterns with multiplicative updates on the projected image error.

    The image error never increases from one step to the next.

    Args:
        target (ImagePlane or ndarray): Target image i
        P (ProjectionOperator): Projection operator
        front (ndarray): M x K starting front patterns
        rear (ndarray): M x K starting rear patterns
        lower (float): Pattern lower bound
        iters (int): Number of alternations
        records (list): When given, receives one IterationRecord per step,
            numbered after the records already in it

    Returns:
        tuple: (F, G), each M x K
    """
    target_vec = _target_vector(P, target)
    front = np.array(front, dtype=np.float64)
    rear = np.array(rear, dtype=np.float64)
    factorizer = ImageFactorizer(P, target_vec, front.shape[1], lower)
    offset = len(records) if records is not None else 0
    target_img = target_vec.reshape(P.target_shape)
    for step in range(1, iters + 1):
        front, rear = factorizer.step(front, rear)
        if not (np.all(np.isfinite(front)) and np.all(np.isfinite(rear))):
            raise SolverDivergedError(f"non-finite pattern at refinement step {step}", iteration=offset + step)
        if records is not None:
            image = factorizer.image(front, rear)
            records.append(IterationRecord(offset + step, float(np.linalg.norm(image - target_vec)), 0.0,
                                           psnr(image.reshape(P.target_shape), target_img), STAGE_REFINE))
    return front, rear


def decompose_superres(target, P, K, cfg, lower=0.0, init=None):
    """
    Compute K pattern pairs whose projection approximates a target image.

    Args:
        target (ImagePlane): Single-channel target at the operator's resolution
        P (ProjectionOperator): Projection operator of the display
        K (int): Number of frames
        cfg (SolverConfig): Iteration schedule and seed
        lower (float): Pattern lower bound (panel black level)
        init (tuple): Optional (F, G) warm start

    Returns:
        tuple: (PatternSet, Diagnostics)
    """
    if K < 1:
        raise InvalidArgumentError(f"K must be >= 1, got {K}")
    target_vec = _target_vector(P, target)
    support = P.support
    diagnostics = Diagnostics(rank=K, lower_bound=lower)

    floor = lower * lower
    if lower > 0:
        diagnostics.unreachable_pixels = int(np.count_nonzero(target_vec < floor - 1e-12))
        if diagnostics.unreachable_pixels:
            logger.warning("%d target pixels lie below the dual-layer floor %.4f",
                           diagnostics.unreachable_pixels, floor)

    if init is None:
        front, rear = initial_patterns(support.panel_count, K, lower, cfg.seed)
    else:
        front, rear = (np.clip(np.array(m, dtype=np.float64), lower, 1.0) for m in init)

    state = LightFieldVar(support.outer_mean(front, rear), np.zeros(P.n_rows), cfg.rho)
    tol = cfg.tol_primal * float(np.linalg.norm(target_vec))
    target_img = target_vec.reshape(P.target_shape)

    for it in range(1, cfg.outer_iters + 1):
        factored = support.outer_mean(front, rear)
        light_field = _sart_sweeps(state.light_field, factored, P, target_vec - state.dual, state.rho, cfg)
        if not np.all(np.isfinite(light_field)):
            raise SolverDivergedError(f"non-finite light field at outer iteration {it}", iteration=it)
        front, rear = factorize_box(MaskedLightField(support, light_field), K, lower, cfg,
                                    init=(front, rear), iters=cfg.fact_iters)
        residual = P.matvec(light_field) - target_vec
        dual = state.dual + residual
        if not (np.all(np.isfinite(dual)) and np.all(np.isfinite(front)) and np.all(np.isfinite(rear))):
            raise SolverDivergedError(f"non-finite iterate at outer iteration {it}", iteration=it)
        state = LightFieldVar(light_field, dual, state.rho)

        factored = support.outer_mean(front, rear)
        primal = float(np.linalg.norm(residual))
        record = IterationRecord(it, primal, float(np.linalg.norm(factored - state.light_field)),
                                 psnr(P.matvec(factored).reshape(P.target_shape), target_img))
        diagnostics.records.append(record)
        logger.debug("iter %d: primal %.3e fact %.3e psnr %.2f dB", it, record.primal_residual,
                     record.fact_error, record.psnr)
        if primal < tol:
            diagnostics.converged = True
            break

    if cfg.refine_iters:
        admm_db = diagnostics.final_psnr
        front, rear = refine_patterns(target_vec, P, front, rear, lower, cfg.refine_iters,
                                      diagnostics.records)
        logger.debug("refinement: %.2f dB -> %.2f dB", admm_db, diagnostics.final_psnr)

    logger.info("decomposed %s target at rank %d: %.2f dB after %d iterations%s",
                P.target_shape, K, diagnostics.final_psnr, diagnostics.admm_iterations,
                " (converged)" if diagnostics.converged else "")
    patterns = PatternSet(front, rear, lower, P.panel_shape)
    return patterns, diagnostics


def decompose_channels(target, P, K, cfg, lower=0.0):
    """
    Decompose every channel of a target independently with the same operator.

    Args:
        target (ImagePlane): Gray or RGB target
        P (ProjectionOperator): Projection operator
        K (int): Number of frames
        cfg (SolverConfig): Iteration schedule and seed
        lower (float): Pattern lower bound

    Returns:
        tuple: (list of PatternSet, list of Diagnostics), one entry per channel
    """
    patterns, diagnostics = [], []
    for channel, plane in enumerate(target.split_channels()):
        logger.info("channel %d of %d", channel + 1, target.channels)
        pat, diag = decompose_superres(plane, P, K, cfg, lower)
        patterns.append(pat)
        diagnostics.append(diag)
    return patterns, diagnostics
