"""
Forward Model

Builds the projection operator P that maps the light field synthesized by the
two panels onto the superresolved pixels of the diffuser, and evaluates the
image formation i = P vec((1/K) F G^T).

Every diffuser point integrates rays over the angular profile of the diffuser.
A ray leaving superpixel center x at angle theta hits the front panel at
x - d tan(theta) and the rear panel at x - (d + d_l) tan(theta). Pixels are
boxes, so a ray lights exactly the one front and one rear pixel it passes
through. The weight of a (front, rear) pair is the integral of the profile over
the angles whose ray passes through both, computed in closed form between the
angles where the ray crosses a pixel boundary. Pairs outside the panels are
dropped and every row is normalized to unit sum. Because the diffuser weights
are applied per axis, the operator is the Kronecker product of one operator
per axis and is stored that way.

Author: CodeWithEzeh
Date: November 2025
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy import ndimage

from constants import *
from core import ActiveSupport, ImagePlane, diffuser_integral
from errors import DimensionError, ImageIOError, InvalidArgumentError, ProjectionError

logger = logging.getLogger(__name__)

TRIPLE_HEADER = np.dtype([("n_rows", "<u8"), ("panel_count", "<u8"), ("count", "<u8")])
TRIPLE_RECORD = np.dtype([("row", "<u8"), ("front", "<u8"), ("rear", "<u8"), ("weight", "<f8")])


class ProjectionOperator:
    """
    Sparse linear map from the light field on its active support to the superpixels.

    Column j of the operator belongs to the active pair
    (support.front[j], support.rear[j]).
    """

    def __init__(self, matrix, support, target_shape=None, row_normalized=False, panel_shape=None):
        """
        Args:
            matrix (scipy.sparse matrix): N x len(support) weights
            support (ActiveSupport): Light field pairs, one per column
            target_shape (tuple): (rows, cols) of the superresolved image
            row_normalized (bool): Rows sum to one
            panel_shape (tuple): (rows, cols) of either panel
        """
        self.matrix = sp.csr_matrix(matrix)
        self.support = support
        if self.matrix.shape[1] != len(support):
            raise DimensionError(f"operator has {self.matrix.shape[1]} columns for {len(support)} pairs")
        self.target_shape = tuple(target_shape) if target_shape is not None else (1, self.matrix.shape[0])
        if self.target_shape[0] * self.target_shape[1] != self.matrix.shape[0]:
            raise DimensionError(f"target_shape {self.target_shape} does not hold {self.matrix.shape[0]} rows")
        self.row_normalized = row_normalized
        self.panel_shape = tuple(panel_shape) if panel_shape is not None else (1, support.panel_count)
        if self.panel_shape[0] * self.panel_shape[1] != support.panel_count:
            raise DimensionError(f"panel_shape {self.panel_shape} does not hold {support.panel_count} pixels")
        self._transpose = None

    @property
    def n_rows(self):
        """int: N, the number of superpixels."""
        return self.target_shape[0] * self.target_shape[1]

    @property
    def panel_count(self):
        return self.support.panel_count

    @property
    def n_active(self):
        return len(self.support)

    def matvec(self, light_field):
        """
        Apply P to a light field given on the active support.

        Args:
            light_field (ndarray): One value per active pair

        Returns:
            ndarray: Length-N image
        """
        return self.matrix @ light_field

    def rmatvec(self, residual):
        """
        Apply P^T to a superpixel vector.

        Args:
            residual (ndarray): Length-N vector

        Returns:
            ndarray: One value per active pair
        """
        if self._transpose is None:
            self._transpose = self.matrix.T.tocsr()
        return self._transpose @ residual

    def row_sums(self):
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def column_sums(self):
        return np.asarray(self.matrix.sum(axis=0)).ravel()

    def to_sparse(self):
        """Return P as an N x len(support) scipy CSR matrix."""
        return self.matrix

    def triples(self):
        """
        Explicit (row, front, rear, weight) records, sorted by row.

        Returns:
            tuple: Four parallel arrays
        """
        coo = self.to_sparse().tocoo()
        order = np.lexsort((coo.col, coo.row))
        rows, cols, weights = coo.row[order], coo.col[order], coo.data[order]
        return (rows.astype(np.int64), self.support.front[cols], self.support.rear[cols], weights)

    def to_dense(self):
        """
        Materialize the full N x M^2 matrix of the discrete image formation.

        Only meant for small operators.

        Returns:
            ndarray: Column a * M + b holds the weights of light field entry (a, b)
        """
        m = self.panel_count
        dense = np.zeros((self.n_rows, m * m))
        rows, front, rear, weights = self.triples()
        np.add.at(dense, (rows, front * m + rear), weights)
        return dense

    @classmethod
    def from_triples(cls, n_rows, panel_count, triples, row_normalized=False, target_shape=None,
                     panel_shape=None):
        """
        Build an operator from explicit (row, front, rear, weight) records.

        Coincident records are merged by summing their weights.

        Args:
            n_rows (int): N
            panel_count (int): M
            triples (iterable): (row, front, rear, weight) records
            row_normalized (bool): Normalize every row to unit sum
            target_shape (tuple): Optional (rows, cols) of the image
            panel_shape (tuple): Optional (rows, cols) of either panel

        Returns:
            ProjectionOperator
        """
        records = np.asarray(list(triples) if not isinstance(triples, np.ndarray) else triples, dtype=np.float64)
        records = records.reshape(-1, 4)
        rows = records[:, 0].astype(np.int64)
        front = records[:, 1].astype(np.int64)
        rear = records[:, 2].astype(np.int64)
        weights = records[:, 3]
        if np.any(weights <= 0):
            raise InvalidArgumentError("projection weights must be positive")
        if rows.size and (rows.min() < 0 or rows.max() >= n_rows):
            raise InvalidArgumentError("triple row outside the image")
        if rows.size and (min(front.min(), rear.min()) < 0 or max(front.max(), rear.max()) >= panel_count):
            raise InvalidArgumentError("triple pixel outside the panel")
        pairs, columns = np.unique(front * panel_count + rear, return_inverse=True)
        support = ActiveSupport(pairs // panel_count, pairs % panel_count, panel_count)
        matrix = sp.coo_matrix((weights, (rows, columns.ravel())), shape=(n_rows, pairs.size)).tocsr()
        matrix.sum_duplicates()
        if row_normalized:
            totals = np.asarray(matrix.sum(axis=1)).ravel()
            empty = np.flatnonzero(totals <= 0)
            if empty.size:
                raise ProjectionError(f"superpixel row {empty[0]} receives no light", row=int(empty[0]))
            matrix = sp.diags(1.0 / totals) @ matrix
        return cls(matrix, support, target_shape, row_normalized, panel_shape)


@dataclass(frozen=True)
class AxisProjection:
    """One-dimensional projection along a single panel axis."""

    matrix: sp.csr_matrix
    front: np.ndarray
    rear: np.ndarray


class SeparableProjection(ProjectionOperator):
    """
    Projection operator stored as the Kronecker product of a row-axis and a
    column-axis operator.

    Active pairs are ordered row-pair major: pair p = py * n_col_pairs + qx
    joins front pixel (front_y[py], front_x[qx]) with rear pixel
    (rear_y[py], rear_x[qx]).
    """

    def __init__(self, rows_axis, cols_axis, panel_shape):
        """
        Args:
            rows_axis (AxisProjection): Operator along the panel rows
            cols_axis (AxisProjection): Operator along the panel columns
            panel_shape (tuple): (rows, cols) of either panel
        """
        self.rows_axis = rows_axis
        self.cols_axis = cols_axis
        n_cols = panel_shape[1]
        front = (rows_axis.front[:, None] * n_cols + cols_axis.front[None, :]).ravel()
        rear = (rows_axis.rear[:, None] * n_cols + cols_axis.rear[None, :]).ravel()
        self.support = ActiveSupport(front, rear, panel_shape[0] * panel_shape[1])
        self.target_shape = (rows_axis.matrix.shape[0], cols_axis.matrix.shape[0])
        self.row_normalized = True
        self.panel_shape = tuple(panel_shape)
        self._pair_shape = (rows_axis.front.size, cols_axis.front.size)
        self._rows_t = rows_axis.matrix.T.tocsr()
        self._cols_t = cols_axis.matrix.T.tocsr()
        self._sparse = None

    def matvec(self, light_field):
        lf = np.asarray(light_field).reshape(self._pair_shape)
        partial = self.rows_axis.matrix @ lf
        return (self.cols_axis.matrix @ partial.T).T.ravel()

    def rmatvec(self, residual):
        res = np.asarray(residual).reshape(self.target_shape)
        partial = self._rows_t @ res
        return (self._cols_t @ partial.T).T.ravel()

    def row_sums(self):
        ry = np.asarray(self.rows_axis.matrix.sum(axis=1)).ravel()
        rx = np.asarray(self.cols_axis.matrix.sum(axis=1)).ravel()
        return np.outer(ry, rx).ravel()

    def column_sums(self):
        cy = np.asarray(self.rows_axis.matrix.sum(axis=0)).ravel()
        cx = np.asarray(self.cols_axis.matrix.sum(axis=0)).ravel()
        return np.outer(cy, cx).ravel()

    def to_sparse(self):
        if self._sparse is None:
            self._sparse = sp.kron(self.rows_axis.matrix, self.cols_axis.matrix, format="csr")
        return self._sparse

    @property
    def matrix(self):
        return self.to_sparse()


def _ray_bundle(centers, n_panel, pitch, gap_diffuser, gap_rear, model):
    """
    Slopes tan(theta) and weights of the rays leaving every superpixel center.

    Without a fixed sample count the field of view is cut wherever a ray
    crosses a front or rear cell boundary. Inside each piece both hits stay in
    one cell, so the piece is represented by its middle slope and weighted by
    the exact integral of the profile over it.

    Returns:
        tuple: (row, slope, weight), flat arrays with one entry per ray
    """
    n = centers.size
    if model.angular_samples is not None:
        angles, weights = model.sample_angles(model.angular_samples)
        slopes = np.tan(np.radians(angles))
        return np.repeat(np.arange(n), slopes.size), np.tile(slopes, n), np.tile(weights, n)

    spread = math.tan(math.radians(model.half_angle))
    edges = np.arange(n_panel + 1) * pitch
    rows, slopes, weights = [], [], []
    for t, x in enumerate(centers):
        cuts = [np.array([-spread, spread])]
        for gap in (gap_diffuser, gap_rear):
            if gap > 0:
                crossing = (x - edges) / gap
                cuts.append(crossing[np.abs(crossing) < spread])
        cuts = np.unique(np.concatenate(cuts))
        rows.append(np.full(cuts.size - 1, t))
        slopes.append(0.5 * (cuts[:-1] + cuts[1:]))
        weights.append(np.diff(diffuser_integral(model, np.degrees(np.arctan(cuts)))))
    return np.concatenate(rows), np.concatenate(slopes), np.concatenate(weights)


def _build_axis(n_target, n_panel, pitch, gap_diffuser, gap_panels, model, axis, rows=None):
    """
    Projection along one axis: superpixels x (front, rear) pixel pairs.

    Args:
        n_target (int): Superpixels along the axis
        n_panel (int): Panel pixels along the axis
        pitch (float): mm per panel pixel
        gap_diffuser (float): d in mm
        gap_panels (float): d_l in mm
        model (DiffuserModel): Angular profile
        axis (str): Name used in error messages
        rows (ndarray): Optional superpixel indices to keep, in order

    Returns:
        AxisProjection
    """
    width = n_panel * pitch
    centers = (np.arange(n_target) + 0.5) * width / n_target
    if rows is not None:
        centers = centers[np.asarray(rows)]
    gap_rear = gap_diffuser + gap_panels
    row, slope, weight = _ray_bundle(centers, n_panel, pitch, gap_diffuser, gap_rear, model)

    x = centers[row]
    front = np.floor((x - gap_diffuser * slope) / pitch).astype(np.int64)
    rear = np.floor((x - gap_rear * slope) / pitch).astype(np.int64)
    keep = ((front >= 0) & (front < n_panel) & (rear >= 0) & (rear < n_panel)
            & (weight > MIN_RAY_WEIGHT))
    pair = front[keep] * n_panel + rear[keep]
    matrix = sp.coo_matrix((weight[keep], (row[keep], pair)),
                           shape=(centers.size, n_panel * n_panel)).tocsr()
    matrix.sum_duplicates()

    totals = np.asarray(matrix.sum(axis=1)).ravel()
    empty = np.flatnonzero(totals <= 0)
    if empty.size:
        raise ProjectionError(
            f"superpixel {axis} {empty[0]}: diffuser footprint lies entirely outside the panels",
            row=int(empty[0]))
    matrix = (sp.diags(1.0 / totals) @ matrix).tocsr()
    matrix.sort_indices()

    used = np.unique(matrix.indices)
    compact = sp.csr_matrix((matrix.data, np.searchsorted(used, matrix.indices), matrix.indptr),
                            shape=(centers.size, used.size))
    return AxisProjection(compact, used // n_panel, used % n_panel)


def build_axis_projections(geom, model, rows=None, cols=None):
    """
    The row-axis and column-axis operators of a display.

    Args:
        geom (DisplayGeometry): Display layout
        model (DiffuserModel): Diffuser profile
        rows (ndarray): Optional target rows to keep
        cols (ndarray): Optional target columns to keep

    Returns:
        tuple: (rows AxisProjection, cols AxisProjection)
    """
    rows_axis = _build_axis(geom.target_rows, geom.panel_rows, geom.panel_pitch,
                            geom.gap_diffuser, geom.gap_panels, model, "row", rows)
    cols_axis = _build_axis(geom.target_cols, geom.panel_cols, geom.panel_pitch,
                            geom.gap_diffuser, geom.gap_panels, model, "column", cols)
    return rows_axis, cols_axis


def build_projection(geom, model):
    """
    Construct the projection operator of a display.

    Args:
        geom (DisplayGeometry): Display layout
        model (DiffuserModel): Diffuser profile

    Returns:
        SeparableProjection: Row-normalized operator, N x (active pairs)
    """
    rows_axis, cols_axis = build_axis_projections(geom, model)
    op = SeparableProjection(rows_axis, cols_axis, geom.panel_shape)
    logger.debug("projection %s -> %s: %d active pairs (%s angular integral)",
                 geom.panel_shape, geom.target_shape, op.n_active,
                 "exact" if model.angular_samples is None else f"{model.angular_samples}-ray")
    return op


def _check_patterns(P, pat):
    if pat.panel_count != P.panel_count:
        raise DimensionError(f"patterns have {pat.panel_count} pixels, operator expects {P.panel_count}")


def apply_projection(P, pat):
    """
    Image observed on the diffuser: i = P vec((1/K) F G^T).

    Args:
        P (ProjectionOperator): Projection operator
        pat (PatternSet): Front and rear frames

    Returns:
        ImagePlane: Unclamped superresolved image
    """
    _check_patterns(P, pat)
    light_field = P.support.outer_mean(pat.front, pat.rear)
    return ImagePlane(P.matvec(light_field).reshape(P.target_shape))


def apply_adjoint(P, residual):
    """
    Back-project a superpixel vector onto the light field matrix.

    Args:
        P (ProjectionOperator): Projection operator
        residual (array or ImagePlane): Length-N vector

    Returns:
        scipy.sparse.csr_matrix: M x M matrix, nonzero only on the active support
    """
    if isinstance(residual, ImagePlane):
        residual = residual.values
    residual = np.asarray(residual, dtype=np.float64).ravel()
    if residual.size != P.n_rows:
        raise DimensionError(f"residual has {residual.size} entries, operator has {P.n_rows} rows")
    values = P.rmatvec(residual)
    m = P.panel_count
    return sp.csr_matrix((values, (P.support.front, P.support.rear)), shape=(m, m))


def _sample_panel(frame, rows_pos, cols_pos):
    """Bilinear lookup of a panel frame at pixel coordinates; zero outside the panel."""
    snap_r = np.round(rows_pos)
    rows_pos = np.where(np.abs(rows_pos - snap_r) < SNAP_TOLERANCE, snap_r, rows_pos)
    snap_c = np.round(cols_pos)
    cols_pos = np.where(np.abs(cols_pos - snap_c) < SNAP_TOLERANCE, snap_c, cols_pos)
    grid_r, grid_c = np.meshgrid(rows_pos, cols_pos, indexing="ij")
    return ndimage.map_coordinates(frame, [grid_r, grid_c], order=1, mode="grid-constant", cval=0.0)


def render_view(pat, geom, nu):
    """
    Sample the light field emitted by the panels in one direction.

    l(x, nu) = (1/K) sum_k f_k(x - d tan nu) g_k(x - (d + d_l) tan nu), on the
    target grid of geom. Without the diffuser, d is the offset of the eye-side
    parameterization plane and may be 0.

    Args:
        pat (PatternSet): Front and rear frames
        geom (DisplayGeometry): Display layout
        nu (tuple): (theta_x, theta_y) in degrees

    Returns:
        ImagePlane: View at target resolution
    """
    if pat.panel_shape != geom.panel_shape:
        raise DimensionError(f"patterns are {pat.panel_shape}, geometry is {geom.panel_shape}")
    tx, ty = (np.tan(np.radians(v)) for v in nu)
    pitch = geom.panel_pitch
    cx = (np.arange(geom.target_cols) + 0.5) * geom.panel_cols * pitch / geom.target_cols
    cy = (np.arange(geom.target_rows) + 0.5) * geom.panel_rows * pitch / geom.target_rows
    d, dl = geom.gap_diffuser, geom.gap_panels

    front_c, front_r = (cx - d * tx) / pitch - 0.5, (cy - d * ty) / pitch - 0.5
    rear_c, rear_r = (cx - (d + dl) * tx) / pitch - 0.5, (cy - (d + dl) * ty) / pitch - 0.5

    view = np.zeros(geom.target_shape)
    for k in range(pat.rank):
        f = pat.front[:, k].reshape(pat.panel_shape)
        g = pat.rear[:, k].reshape(pat.panel_shape)
        view += _sample_panel(f, front_r, front_c) * _sample_panel(g, rear_r, rear_c)
    return ImagePlane(view / pat.rank)


def render_views(pat, geom, grid):
    """
    Render every view of a view grid.

    Args:
        pat (PatternSet): Front and rear frames
        geom (DisplayGeometry): Display layout
        grid (ViewGrid): Viewing directions

    Returns:
        list: One ImagePlane per view, in grid order
    """
    return [render_view(pat, geom, nu) for nu in grid.angles(geom)]


def area_matrix(n_out, n_in):
    """
    Area-weighted resampling matrix between two regular grids over the same extent.

    Args:
        n_out (int): Output samples
        n_in (int): Input samples

    Returns:
        ndarray: n_out x n_in, rows summing to one
    """
    scale = n_in / n_out
    lo = np.arange(n_out)[:, None] * scale
    hi = lo + scale
    cells = np.arange(n_in)[None, :]
    overlap = np.clip(np.minimum(hi, cells + 1) - np.maximum(lo, cells), 0.0, None)
    return overlap / overlap.sum(axis=1, keepdims=True)


def nearest_matrix(n_out, n_in):
    """
    Nearest-neighbour replication matrix: each output sample copies the input cell
    containing its center.

    Args:
        n_out (int): Output samples
        n_in (int): Input samples

    Returns:
        ndarray: n_out x n_in 0/1 matrix
    """
    centers = (np.arange(n_out) + 0.5) * n_in / n_out
    idx = np.minimum(np.floor(centers).astype(np.int64), n_in - 1)
    out = np.zeros((n_out, n_in))
    out[np.arange(n_out), idx] = 1.0
    return out


def _separable(values, rows_op, cols_op):
    if values.ndim == 2:
        return rows_op @ values @ cols_op.T
    return np.einsum("ir,rcz,jc->ijz", rows_op, values, cols_op)


def resample_area(image, shape):
    """
    Box-filter an image onto a grid of another size.

    Args:
        image (ImagePlane): Source image
        shape (tuple): (rows, cols) of the result

    Returns:
        ImagePlane
    """
    return ImagePlane(_separable(image.values, area_matrix(shape[0], image.rows),
                                 area_matrix(shape[1], image.cols)))


def downsample_to_panel(target, geom):
    """
    Box-filter a target image down to panel resolution.

    Args:
        target (ImagePlane): Image at target resolution
        geom (DisplayGeometry): Display layout

    Returns:
        ImagePlane: Image at panel resolution
    """
    if target.shape != geom.target_shape:
        raise DimensionError(f"target is {target.shape}, geometry expects {geom.target_shape}")
    return resample_area(target, geom.panel_shape)


def simulate_native(target, geom):
    """
    What a single panel at native resolution shows for a target image.

    The target is box-filtered to panel resolution and every panel pixel is
    replicated over its footprint on the target grid.

    Args:
        target (ImagePlane): Image at target resolution
        geom (DisplayGeometry): Display layout

    Returns:
        ImagePlane: Image at target resolution
    """
    panel = downsample_to_panel(target, geom)
    up_rows = nearest_matrix(geom.target_rows, geom.panel_rows)
    up_cols = nearest_matrix(geom.target_cols, geom.panel_cols)
    return ImagePlane(_separable(panel.values, up_rows, up_cols))


def save_projection(P, path):
    """
    Write an operator as a binary triple list.

    Layout (little-endian): uint64 N, uint64 M, uint64 count, then count
    records of (uint64 row, uint64 front, uint64 rear, float64 weight)
    sorted by row.

    Args:
        P (ProjectionOperator): Operator to store
        path (str or Path): Destination file
    """
    rows, front, rear, weights = P.triples()
    header = np.array([(P.n_rows, P.panel_count, rows.size)], dtype=TRIPLE_HEADER)
    records = np.empty(rows.size, dtype=TRIPLE_RECORD)
    records["row"], records["front"], records["rear"], records["weight"] = rows, front, rear, weights
    try:
        with open(path, "wb") as f:
            f.write(header.tobytes())
            f.write(records.tobytes())
    except OSError as exc:
        raise ImageIOError(f"cannot write {path}: {exc.strerror}") from None
    logger.info("wrote %d projection triples to %s", rows.size, path)


def load_projection(path, target_shape=None, panel_shape=None):
    """
    Read an operator written by save_projection.

    Args:
        path (str or Path): Source file
        target_shape (tuple): Optional (rows, cols) of the image
        panel_shape (tuple): Optional (rows, cols) of either panel

    Returns:
        ProjectionOperator
    """
    try:
        with open(path, "rb") as f:
            blob = f.read()
    except OSError as exc:
        raise ImageIOError(f"cannot read {path}: {exc.strerror}") from None
    if len(blob) < TRIPLE_HEADER.itemsize:
        raise InvalidArgumentError(f"{path}: truncated projection header")
    header = np.frombuffer(blob, dtype=TRIPLE_HEADER, count=1)[0]
    count = int(header["count"])
    expected = TRIPLE_HEADER.itemsize + count * TRIPLE_RECORD.itemsize
    if len(blob) != expected:
        raise InvalidArgumentError(f"{path}: expected {expected} bytes, found {len(blob)}")
    records = np.frombuffer(blob, dtype=TRIPLE_RECORD, offset=TRIPLE_HEADER.itemsize, count=count)
    triples = np.column_stack([records["row"].astype(np.float64), records["front"].astype(np.float64),
                               records["rear"].astype(np.float64), records["weight"]])
    op = ProjectionOperator.from_triples(int(header["n_rows"]), int(header["panel_count"]),
                                         triples, target_shape=target_shape,
                                         panel_shape=panel_shape)
    sums = op.row_sums()
    op.row_normalized = bool(np.all(np.abs(sums - 1.0) <= ROW_SUM_TOLERANCE))
    return op
