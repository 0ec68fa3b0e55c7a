"""
Core Display Types

This module holds the domain types shared by every other module: the physical
layout of the dual-layer display, the diffuser model, images, pattern sets and
the light field variables the solver works on. All types are immutable once
built and validate their invariants on construction.

Author: CodeWithEzeh
Date: November 2025
"""

import math
from dataclasses import dataclass

import numpy as np

from constants import *
from errors import DimensionError, InvalidArgumentError


@dataclass(frozen=True)
class DisplayGeometry:
    """
    Physical layout of the two LCD panels and the diffuser.

    Both panels share the resolution M = panel_cols x panel_rows. The target
    (superresolved) image has round(sr_factor * panel_cols) columns and
    round(sr_factor * panel_rows) rows.
    """

    panel_cols: int = PANEL_COLS
    panel_rows: int = PANEL_ROWS
    panel_pitch: float = PANEL_PITCH
    gap_panels: float = GAP_PANELS
    gap_diffuser: float = GAP_DIFFUSER
    sr_factor: float = SR_FACTOR

    def __post_init__(self):
        if int(self.panel_cols) != self.panel_cols or self.panel_cols < 1:
            raise InvalidArgumentError(f"panel_cols must be a positive integer, got {self.panel_cols}")
        if int(self.panel_rows) != self.panel_rows or self.panel_rows < 1:
            raise InvalidArgumentError(f"panel_rows must be a positive integer, got {self.panel_rows}")
        if not self.panel_pitch > 0:
            raise InvalidArgumentError(f"panel_pitch must be > 0, got {self.panel_pitch}")
        if not self.gap_panels > 0:
            raise InvalidArgumentError(f"gap_panels must be > 0, got {self.gap_panels}")
        if not self.gap_diffuser >= 0:
            raise InvalidArgumentError(f"gap_diffuser must be >= 0, got {self.gap_diffuser}")
        if not self.sr_factor >= 1:
            raise InvalidArgumentError(f"sr_factor must be >= 1, got {self.sr_factor}")

    @property
    def panel_shape(self):
        """tuple: (rows, cols) of either panel."""
        return (int(self.panel_rows), int(self.panel_cols))

    @property
    def panel_count(self):
        """int: M, the number of pixels per panel."""
        return int(self.panel_rows) * int(self.panel_cols)

    @property
    def target_cols(self):
        return int(round(self.sr_factor * self.panel_cols))

    @property
    def target_rows(self):
        return int(round(self.sr_factor * self.panel_rows))

    @property
    def target_shape(self):
        """tuple: (rows, cols) of the superresolved image."""
        return (self.target_rows, self.target_cols)

    @property
    def target_count(self):
        """int: N, the number of superresolved pixels."""
        return self.target_rows * self.target_cols

    def describe(self):
        """
        Canonical text form, used for hashing into manifests.

        Returns:
            str: One line with every field
        """
        return (f"panel={self.panel_cols}x{self.panel_rows} pitch={self.panel_pitch!r} "
                f"gap_panels={self.gap_panels!r} gap_diffuser={self.gap_diffuser!r} "
                f"sr_factor={self.sr_factor!r}")


@dataclass(frozen=True)
class DiffuserModel:
    """
    Angular weighting profile of the diffuser.

    The profile is rotationally symmetric in the prototype; it is applied here
    as the product of two per-axis weights so the projection stays separable.
    When angular_samples is None the angular integral is evaluated exactly;
    otherwise it is approximated with that many equally spaced rays per axis.
    """

    half_angle: float = DIFFUSER_HALF_ANGLE
    profile: str = PROFILE_COSINE
    angular_samples: int = None

    def __post_init__(self):
        if not (0 < self.half_angle < 90):
            raise InvalidArgumentError(f"half_angle must lie in (0, 90) degrees, got {self.half_angle}")
        if self.profile not in DIFFUSER_PROFILES:
            raise InvalidArgumentError(f"unknown diffuser profile {self.profile!r}")
        if self.angular_samples is not None and self.angular_samples < MIN_ANGULAR_SAMPLES:
            raise InvalidArgumentError(f"angular_samples must be >= {MIN_ANGULAR_SAMPLES}")

    def sample_angles(self, count):
        """
        Midpoint angular grid over the open field of view.

        Midpoints keep every sample strictly inside the profile, so every ray
        carries a positive weight.

        Args:
            count (int): Samples per axis

        Returns:
            tuple: (angles in degrees, weights), both arrays of length count
        """
        step = 2.0 * self.half_angle / count
        angles = -self.half_angle + (np.arange(count) + 0.5) * step
        return angles, diffuser_weight(self, angles)


@dataclass(frozen=True, eq=False)
class ImagePlane:
    """
    A single- or three-channel image, row-major, nominally in [0, 1].

    Values are only clamped at I/O boundaries; internal results may overshoot.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim not in (2, 3) or (values.ndim == 3 and values.shape[2] not in (1, 3)):
            raise DimensionError(f"image must be rows x cols (x 1|3), got shape {values.shape}")
        if values.ndim == 3 and values.shape[2] == 1:
            values = values[:, :, 0]
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("image contains non-finite values")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def rows(self):
        return self.values.shape[0]

    @property
    def cols(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def channels(self):
        return 1 if self.values.ndim == 2 else 3

    def clamped(self):
        """Return a copy clamped to [0, 1]."""
        return ImagePlane(np.clip(self.values, 0.0, 1.0))

    def split_channels(self):
        """
        Split into single-channel planes.

        Returns:
            list: One ImagePlane per channel
        """
        if self.channels == 1:
            return [self]
        return [ImagePlane(self.values[:, :, c]) for c in range(3)]

    @staticmethod
    def merge_channels(planes):
        """
        Stack single-channel planes back into one image.

        Args:
            planes (list): ImagePlanes with equal shapes

        Returns:
            ImagePlane: Gray for one plane, RGB for three
        """
        if len(planes) == 1:
            return planes[0]
        return ImagePlane(np.stack([p.values for p in planes], axis=2))

    def to_gray(self):
        """Average the channels into a single-channel plane."""
        if self.channels == 1:
            return self
        return ImagePlane(self.values.mean(axis=2))


@dataclass(frozen=True, eq=False)
class PatternSet:
    """
    K frame pairs of panel transmittances.

    Column k of front (rear) is frame k of the front (rear) panel, flattened
    row-major over panel_shape. The eye averages the K frames.
    """

    front: np.ndarray
    rear: np.ndarray
    lower_bound: float = 0.0
    panel_shape: tuple = None

    def __post_init__(self):
        front = np.array(self.front, dtype=np.float64)
        rear = np.array(self.rear, dtype=np.float64)
        if front.ndim == 1:
            front = front.reshape(-1, 1)
        if rear.ndim == 1:
            rear = rear.reshape(-1, 1)
        if front.shape != rear.shape or front.ndim != 2:
            raise DimensionError(f"front {front.shape} and rear {rear.shape} must both be M x K")
        if front.shape[1] < 1:
            raise InvalidArgumentError("a pattern set needs at least one frame")
        if not (0.0 <= self.lower_bound < 1.0):
            raise InvalidArgumentError(f"lower_bound must lie in [0, 1), got {self.lower_bound}")
        tol = 1e-12
        for name, mat in (("front", front), ("rear", rear)):
            if not np.all(np.isfinite(mat)):
                raise InvalidArgumentError(f"{name} patterns contain non-finite values")
            if mat.min() < self.lower_bound - tol or mat.max() > 1.0 + tol:
                raise InvalidArgumentError(f"{name} patterns leave [{self.lower_bound}, 1]")
        shape = self.panel_shape
        if shape is None:
            shape = (1, front.shape[0])
        shape = (int(shape[0]), int(shape[1]))
        if shape[0] * shape[1] != front.shape[0]:
            raise DimensionError(f"panel_shape {shape} does not hold {front.shape[0]} pixels")
        front.setflags(write=False)
        rear.setflags(write=False)
        object.__setattr__(self, "front", front)
        object.__setattr__(self, "rear", rear)
        object.__setattr__(self, "panel_shape", shape)

    @property
    def rank(self):
        """int: K, the number of time-multiplexed frames."""
        return self.front.shape[1]

    @property
    def panel_count(self):
        return self.front.shape[0]

    def frame(self, k):
        """
        Return frame k as two panel images.

        Args:
            k (int): Frame index

        Returns:
            tuple: (front ImagePlane, rear ImagePlane)
        """
        return (ImagePlane(self.front[:, k].reshape(self.panel_shape)),
                ImagePlane(self.rear[:, k].reshape(self.panel_shape)))


class ActiveSupport:
    """
    The (front pixel, rear pixel) pairs of the light field matrix that carry light.

    Pairs are stored as two parallel index arrays; the position of a pair in
    these arrays is its column in the projection operator.
    """

    def __init__(self, front, rear, panel_count):
        """
        Args:
            front (array): Front-panel pixel index per active pair
            rear (array): Rear-panel pixel index per active pair
            panel_count (int): M
        """
        self.front = np.asarray(front, dtype=np.int64)
        self.rear = np.asarray(rear, dtype=np.int64)
        self.panel_count = int(panel_count)
        if self.front.shape != self.rear.shape or self.front.ndim != 1:
            raise DimensionError("front and rear index arrays must be 1-D and equally long")
        if self.front.size and (min(self.front.min(), self.rear.min()) < 0 or
                                max(self.front.max(), self.rear.max()) >= self.panel_count):
            raise InvalidArgumentError("active pair outside the panel")
        self.front.setflags(write=False)
        self.rear.setflags(write=False)

    def __len__(self):
        return self.front.size

    @classmethod
    def full(cls, panel_count):
        """Every pair of an M x M matrix, row-major."""
        a, b = np.divmod(np.arange(panel_count * panel_count), panel_count)
        return cls(a, b, panel_count)

    def outer_mean(self, front, rear):
        """
        Evaluate (1/K) F G^T on the active pairs.

        Args:
            front (ndarray): M x K front patterns
            rear (ndarray): M x K rear patterns

        Returns:
            ndarray: One value per active pair
        """
        k = front.shape[1]
        return np.einsum("ij,ij->i", front[self.front], rear[self.rear]) / k

    def scatter(self, values):
        """
        Place per-pair values into a dense M x M matrix.

        Args:
            values (array): One value per active pair

        Returns:
            ndarray: M x M matrix, zero off the support
        """
        mat = np.zeros((self.panel_count, self.panel_count))
        np.add.at(mat, (self.front, self.rear), values)
        return mat


@dataclass(frozen=True, eq=False)
class MaskedLightField:
    """
    A light field matrix known only on an active support, with per-entry weights.
    """

    support: ActiveSupport
    values: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.support),):
            raise DimensionError(f"expected {len(self.support)} values, got {values.shape}")
        weights = np.ones_like(values) if self.weights is None else np.asarray(self.weights, dtype=np.float64)
        if weights.shape != values.shape:
            raise DimensionError("weights and values must have equal length")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_dense(cls, matrix, weights=None):
        """
        Wrap a dense M x M matrix; entries with zero weight are left out.

        Args:
            matrix (ndarray): M x M light field
            weights (ndarray): Optional M x M weights, ones when omitted

        Returns:
            MaskedLightField
        """
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"light field matrix must be square, got {matrix.shape}")
        m = matrix.shape[0]
        weights = np.ones_like(matrix) if weights is None else np.asarray(weights, dtype=np.float64)
        a, b = np.nonzero(weights > 0)
        return cls(ActiveSupport(a, b, m), matrix[a, b], weights[a, b])

    def to_dense(self):
        """Return the M x M matrix with zeros off the support."""
        return self.support.scatter(self.values)


@dataclass(frozen=True, eq=False)
class LightFieldVar:
    """
    ADMM splitting variable: light field L on the active support and scaled dual u.
    """

    light_field: np.ndarray
    dual: np.ndarray
    rho: float

    def __post_init__(self):
        light_field = np.asarray(self.light_field, dtype=np.float64)
        if light_field.ndim != 1:
            raise DimensionError(f"light field must be a vector over the active pairs, got shape {light_field.shape}")
        if not np.all(np.isfinite(light_field)):
            raise InvalidArgumentError("light field must be finite")
        if light_field.size and light_field.min() < 0:
            raise InvalidArgumentError(f"light field must be nonnegative, found {light_field.min():.3g}")
        if not np.all(np.isfinite(self.dual)):
            raise InvalidArgumentError("dual variable must be finite")

    def as_matrix(self, support):
        """
        Scatter L into a dense M x M matrix.

        Args:
            support (ActiveSupport): Pairs the light field lives on

        Returns:
            ndarray: M x M light field, zero off the support
        """
        return support.scatter(self.light_field)


@dataclass(frozen=True)
class SolverConfig:
    """Iteration schedule and numerical parameters of the decomposition."""

    outer_iters: int = OUTER_ITERS
    sart_iters: int = SART_ITERS
    fact_iters: int = FACT_ITERS
    rho: float = RHO
    tol_primal: float = TOL_PRIMAL
    seed: int = SEED
    relaxation: float = RELAXATION
    refine_iters: int = REFINE_ITERS

    def __post_init__(self):
        for name in ("outer_iters", "sart_iters", "fact_iters"):
            if getattr(self, name) < 1:
                raise InvalidArgumentError(f"{name} must be >= 1")
        if self.refine_iters < 0:
            raise InvalidArgumentError("refine_iters must be >= 0")
        if not self.tol_primal > 0:
            raise InvalidArgumentError("tol_primal must be > 0")
        if not (0 < self.relaxation <= 2):
            raise InvalidArgumentError("relaxation must lie in (0, 2]")
        if not self.rho > 0:
            raise InvalidArgumentError("rho must be > 0")


@dataclass(frozen=True)
class ViewGrid:
    """
    Viewing directions of the diffuser-off modes.

    Each view is an integer shift (rows, cols) between the front pixel a ray
    leaves and the rear pixel it came through, measured with the front panel as
    the parameterization plane.
    """

    cols: int = VIEW_COLS
    rows: int = VIEW_ROWS
    spacing: int = VIEW_SPACING

    def __post_init__(self):
        if self.cols < 0 or self.rows < 0 or self.spacing < 0:
            raise InvalidArgumentError("view grid dimensions must be non-negative")

    @property
    def count(self):
        return len(self.shifts())

    def shifts(self):
        """
        Rear-pixel shifts of every view, row-major over the grid.

        Returns:
            list: (shift_rows, shift_cols) integer pairs
        """
        return [((r - self.rows // 2) * self.spacing, (c - self.cols // 2) * self.spacing)
                for r in range(self.rows) for c in range(self.cols)]

    def angles(self, geom):
        """
        Viewing angle of every view in degrees.

        Args:
            geom (DisplayGeometry): Display layout

        Returns:
            list: (theta_x, theta_y) pairs
        """
        def to_angle(shift):
            return math.degrees(math.atan(shift * geom.panel_pitch / geom.gap_panels))
        return [(to_angle(sx), to_angle(sy)) for sy, sx in self.shifts()]


def diffuser_weight(model, theta):
    """
    Angular weight of the diffuser profile.

    The cosine profile is cos((pi/2) * theta / theta_max) inside the field of
    view; the uniform profile is 1 inside. Both are 0 outside.

    Args:
        model (DiffuserModel): Diffuser profile
        theta (float or array): Angle(s) in degrees

    Returns:
        float or ndarray: Weight(s) in [0, 1]
    """
    arr = np.asarray(theta, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"theta must be finite, got {theta}")
    inside = np.abs(arr) < model.half_angle
    if model.profile == PROFILE_COSINE:
        w = np.where(inside, np.cos(0.5 * np.pi * arr / model.half_angle), 0.0)
    else:
        w = np.where(inside, 1.0, 0.0)
    w = np.clip(w, 0.0, 1.0)
    return float(w) if w.ndim == 0 else w


def diffuser_integral(model, theta):
    """
    Integral of the diffuser profile from -half_angle to theta (degrees).

    Args:
        model (DiffuserModel): Diffuser profile
        theta (float or array): Upper limit(s) in degrees

    Returns:
        float or ndarray: Integrated weight, constant outside the field of view
    """
    h = model.half_angle
    arr = np.clip(np.asarray(theta, dtype=np.float64), -h, h)
    if model.profile == PROFILE_COSINE:
        w = (2.0 * h / np.pi) * (np.sin(0.5 * np.pi * arr / h) + 1.0)
    else:
        w = arr + h
    return float(w) if w.ndim == 0 else w


def diffuser_footprints(geom, model):
    """
    Spatial extent of one diffused point on the front and rear panel.

    Args:
        geom (DisplayGeometry): Display layout
        model (DiffuserModel): Diffuser profile

    Returns:
        tuple: (s1, s2) in mm
    """
    spread = math.tan(math.radians(model.half_angle))
    s1 = 2.0 * geom.gap_diffuser * spread
    s2 = 2.0 * (geom.gap_diffuser + geom.gap_panels) * spread
    return s1, s2


def max_rank_for_refresh(refresh_hz, flicker_hz=FLICKER_HZ):
    """
    Number of frames the eye averages at a given panel refresh rate.

    Args:
        refresh_hz (float): Panel refresh rate
        flicker_hz (float): Critical flicker frequency of the viewer

    Returns:
        int: Largest usable rank, at least 1
    """
    if not (refresh_hz > 0 and flicker_hz > 0):
        raise InvalidArgumentError("refresh and flicker rates must be positive")
    return max(1, int(math.floor(refresh_hz / flicker_hz + 1e-9)))


def degrees_of_freedom_ratio(geom, rank):
    """
    Display degrees of freedom per target pixel: 2 M K / N.

    Args:
        geom (DisplayGeometry): Display layout
        rank (int): Frames per image

    Returns:
        float: Compressibility ratio
    """
    return 2.0 * geom.panel_count * rank / geom.target_count
