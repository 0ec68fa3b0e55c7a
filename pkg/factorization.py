"""
Box-Constrained Factorization

Fits the frame average (1/K) F G^T of K front/rear pattern pairs to a light
field known on an active support, with every pattern value held inside
[lower, 1]. The update rule is the weighted multiplicative one familiar from
nonnegative matrix factorization, followed by clipping to the box. Before each
half-step the columns of F and G are rescaled against each other; the product
is unchanged, so the objective is too, but the factor about to be updated gets
room to move.

ImageFactorizer applies the same kind of update to the error of the projected
image instead of the light field; the solver uses it to polish its result.

Author: CodeWithEzeh
Date: November 2025
"""

import logging

import numpy as np
import scipy.sparse as sp

from constants import *
from core import MaskedLightField
from errors import DimensionError, InvalidArgumentError

logger = logging.getLogger(__name__)

_TINY = np.finfo(np.float64).tiny


def initial_patterns(panel_count, rank, lower, seed):
    """
    Random starting patterns, uniform in [INIT_LOW, INIT_HIGH] and clipped to [lower, 1].

    Args:
        panel_count (int): M
        rank (int): K
        lower (float): Pattern lower bound
        seed (int): Seed of the generator

    Returns:
        tuple: (F, G), each M x K
    """
    rng = np.random.default_rng(seed)
    front = rng.uniform(INIT_LOW, INIT_HIGH, size=(panel_count, rank))
    rear = rng.uniform(INIT_LOW, INIT_HIGH, size=(panel_count, rank))
    return np.clip(front, lower, 1.0), np.clip(rear, lower, 1.0)


def as_masked(lightfield, weights=None):
    """
    Accept a MaskedLightField or a dense M x M array.

    Args:
        lightfield (MaskedLightField or ndarray): Light field to factorize
        weights (ndarray): Optional M x M weights for a dense input

    Returns:
        MaskedLightField
    """
    if isinstance(lightfield, MaskedLightField):
        if weights is not None:
            raise InvalidArgumentError("weights are carried by the MaskedLightField itself")
        return lightfield
    return MaskedLightField.from_dense(lightfield, weights)


def pair_sums(support):
    """
    Sparse matrices summing over the active pairs that share a front (rear) pixel.

    Args:
        support (ActiveSupport): Active pairs

    Returns:
        tuple: (front_sum, rear_sum), each M x len(support)
    """
    m, n = support.panel_count, len(support)
    cols = np.arange(n)
    front_sum = sp.csr_matrix((np.ones(n), (support.front, cols)), shape=(m, n))
    rear_sum = sp.csr_matrix((np.ones(n), (support.rear, cols)), shape=(m, n))
    return front_sum, rear_sum


class BoxFactorizer:
    """
    Alternating multiplicative updates of F and G on one masked light field.

    The objective is sum_p w_p (L_p - (1/K) sum_k F[a_p, k] G[b_p, k])^2 over
    the active pairs p = (a_p, b_p).
    """

    def __init__(self, lightfield, rank, lower=0.0):
        """
        Args:
            lightfield (MaskedLightField): Target values and weights
            rank (int): K
            lower (float): Lower bound b of every pattern value
        """
        self.lightfield = lightfield
        self.rank = int(rank)
        self.lower = float(lower)
        support = lightfield.support
        m = support.panel_count
        if self.rank < 1:
            raise InvalidArgumentError(f"rank must be >= 1, got {rank}")
        if self.rank > m:
            raise InvalidArgumentError(f"rank {rank} exceeds the panel pixel count {m}")
        if not (0.0 <= self.lower < 1.0):
            raise InvalidArgumentError(f"lower bound must lie in [0, 1), got {lower}")
        if np.any(lightfield.values < 0):
            raise InvalidArgumentError("light field to factorize must be nonnegative")
        if np.any(lightfield.weights < 0):
            raise InvalidArgumentError("factorization weights must be nonnegative")

        self._front_sum, self._rear_sum = pair_sums(support)
        self._weighted_target = lightfield.weights * lightfield.values

    @property
    def support(self):
        return self.lightfield.support

    def initial_patterns(self, seed):
        """Seeded starting patterns for this light field."""
        return initial_patterns(self.support.panel_count, self.rank, self.lower, seed)

    def estimate(self, front, rear):
        """(1/K) F G^T on the active pairs."""
        return self.support.outer_mean(front, rear)

    def objective(self, front, rear):
        """
        Weighted squared error of the current patterns.

        Args:
            front (ndarray): M x K
            rear (ndarray): M x K

        Returns:
            float
        """
        diff = self.lightfield.values - self.estimate(front, rear)
        return float(np.sum(self.lightfield.weights * diff * diff))

    def _rescale(self, grow, shrink):
        """
        Move scale from `shrink` into `grow` column by column, staying in the box.

        grow / alpha and shrink * alpha keep every product; alpha is the smallest
        value that keeps grow <= 1 and shrink >= lower.
        """
        grow_max = grow.max(axis=0)
        alpha = grow_max.copy()
        if self.lower > 0:
            alpha = np.maximum(alpha, self.lower / shrink.min(axis=0))
        alpha = np.where(alpha > _TINY, alpha, 1.0)
        return grow / alpha, shrink * alpha

    def _update(self, moving, fixed, moving_sum, moving_index, fixed_index):
        """Multiplicative update of `moving` with `fixed` held, then clip."""
        scaled = fixed / self.rank
        estimate = np.einsum("ij,ij->i", moving[moving_index], scaled[fixed_index])
        numer = moving_sum @ (self._weighted_target[:, None] * scaled[fixed_index])
        denom = moving_sum @ ((self.lightfield.weights * estimate)[:, None] * scaled[fixed_index])
        ratio = np.ones_like(moving)
        np.divide(numer, denom, out=ratio, where=denom > _TINY)
        return np.clip(moving * ratio, self.lower, 1.0)

    def step(self, front, rear):
        """
        One alternation: update F with G held, then G with F held.

        Args:
            front (ndarray): M x K
            rear (ndarray): M x K

        Returns:
            tuple: Updated (F, G)
        """
        support = self.support
        rear, front = self._rescale(rear, front)
        front = self._update(front, rear, self._front_sum, support.front, support.rear)
        front, rear = self._rescale(front, rear)
        rear = self._update(rear, front, self._rear_sum, support.rear, support.front)
        return front, rear


class ImageFactorizer:
    """
    Multiplicative updates of F and G on the image error ||P vec((1/K) F G^T) - i||^2.

    With G held the image is linear in F with nonnegative coefficients, so each
    half-step is the multiplicative nonnegative least-squares update
    F <- F * (grad-) / (grad+). Its majorizer is separable, so clipping to
    [lower, 1] keeps the error from increasing.
    """

    def __init__(self, P, target, rank, lower=0.0):
        """
        Args:
            P (ProjectionOperator): Projection operator
            target (ndarray): Length-N target image
            rank (int): K
            lower (float): Lower bound b of every pattern value
        """
        if not (0.0 <= lower < 1.0):
            raise InvalidArgumentError(f"lower bound must lie in [0, 1), got {lower}")
        target = np.asarray(target, dtype=np.float64).ravel()
        if target.size != P.n_rows:
            raise DimensionError(f"target has {target.size} pixels, operator has {P.n_rows} rows")
        self.P = P
        self.target = target
        self.rank = int(rank)
        self.lower = float(lower)
        self._front_sum, self._rear_sum = pair_sums(P.support)
        self._back = np.maximum(P.rmatvec(target), 0.0)

    def image(self, front, rear):
        """Perceived image P vec((1/K) F G^T) as a length-N vector."""
        return self.P.matvec(self.P.support.outer_mean(front, rear))

    def objective(self, front, rear):
        diff = self.image(front, rear) - self.target
        return float(diff @ diff)

    def _update(self, moving, fixed, moving_sum, fixed_index, front, rear):
        estimate = self.P.rmatvec(self.image(front, rear))
        numer = moving_sum @ (self._back[:, None] * fixed[fixed_index])
        denom = moving_sum @ (estimate[:, None] * fixed[fixed_index])
        ratio = np.ones_like(moving)
        np.divide(numer, denom, out=ratio, where=denom > _TINY)
        return np.clip(moving * ratio, self.lower, 1.0)

    def step(self, front, rear):
        """
        One alternation: update F with G held, then G with F held.

        Args:
            front (ndarray): M x K
            rear (ndarray): M x K

        Returns:
            tuple: Updated (F, G)
        """
        support = self.P.support
        front = self._update(front, rear, self._front_sum, support.rear, front, rear)
        rear = self._update(rear, front, self._rear_sum, support.front, front, rear)
        return front, rear


def factorize_box(lightfield, rank, lower=0.0, cfg=None, *, weights=None, init=None,
                  iters=None, history=None):
    """
    Rank-K factorization of a light field with patterns bounded to [lower, 1].

    Args:
        lightfield (MaskedLightField or ndarray): Light field on its active support,
            or a dense M x M matrix (zero-weight entries are inactive)
        rank (int): Number of frames K
        lower (float): Pattern lower bound b (panel black level)
        cfg (SolverConfig): Supplies the seed and, when iters is None, fact_iters
        weights (ndarray): Optional M x M weights for a dense light field
        init (tuple): Optional (F, G) warm start
        iters (int): Number of alternations, overrides cfg.fact_iters
        history (list): When given, receives the objective after every alternation

    Returns:
        tuple: (F, G), each M x K
    """
    masked = as_masked(lightfield, weights)
    factorizer = BoxFactorizer(masked, rank, lower)
    seed = cfg.seed if cfg is not None else SEED
    if iters is None:
        iters = cfg.fact_iters if cfg is not None else STANDALONE_FACT_ITERS
    if iters < 1:
        raise InvalidArgumentError(f"iters must be >= 1, got {iters}")

    if init is None:
        front, rear = factorizer.initial_patterns(seed)
    else:
        front = np.clip(np.array(init[0], dtype=np.float64), factorizer.lower, 1.0)
        rear = np.clip(np.array(init[1], dtype=np.float64), factorizer.lower, 1.0)
        expected = (masked.support.panel_count, factorizer.rank)
        if front.shape != expected or rear.shape != expected:
            raise DimensionError(f"warm start must be {expected}, got {front.shape} and {rear.shape}")

    for _ in range(iters):
        front, rear = factorizer.step(front, rear)
        if history is not None:
            history.append(factorizer.objective(front, rear))
    logger.debug("factorized %d pairs at rank %d in %d alternations", len(masked.support),
                 factorizer.rank, iters)
    return front, rear


def factorization_objective(lightfield, front, rear, weights=None):
    """
    Weighted squared error sum_p w_p (L_p - ((1/K) F G^T)_p)^2.

    Args:
        lightfield (MaskedLightField or ndarray): Target light field
        front (ndarray): M x K
        rear (ndarray): M x K
        weights (ndarray): Optional M x M weights for a dense light field

    Returns:
        float
    """
    masked = as_masked(lightfield, weights)
    support = masked.support
    diff = masked.values - support.outer_mean(np.asarray(front), np.asarray(rear))
    return float(np.sum(masked.weights * diff * diff))

