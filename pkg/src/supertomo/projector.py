"""Parallel-beam geometry and a sparse ray-driven projector.

The image lives on the square [-1, 1] x [-1, 1]. Pixels are stored row-major
with row 0 at the top of the domain (y = +1), so pixel (i, j) has its center at

    x = -1 + (j + 0.5) * (2 / cols),   y = 1 - (i + 0.5) * (2 / rows).

A ray is a full line, parameterized by its direction angle theta and the
signed offset s of the line from the origin along the detector axis (the
+90-degree rotation of the direction). Tracing computes the exact Euclidean
intersection length of the line with every pixel it crosses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import as_image, check_box, check_nonnegative, check_positive_int

__all__ = [
    "Grid",
    "Ray",
    "SparseRow",
    "ProjectionSystem",
    "make_parallel_geometry",
    "trace_ray",
    "build_system",
    "forward_project",
    "add_noise",
]

# Segment slivers below this length (domain units) are tracing artifacts from
# corner-exact crossings and are dropped.
_SLIVER = 1e-14


@dataclass(frozen=True)
class Grid:
    """Rectangular pixel grid covering [-1, 1] x [-1, 1]."""

    rows: int
    cols: int

    def __post_init__(self):
        check_positive_int("rows", self.rows)
        check_positive_int("cols", self.cols)

    @property
    def n(self) -> int:
        """Number of pixels."""
        return self.rows * self.cols

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def pixel_height(self) -> float:
        return 2.0 / self.rows

    @property
    def pixel_width(self) -> float:
        return 2.0 / self.cols

    def x_centers(self) -> np.ndarray:
        """x coordinates of pixel centers, left to right."""
        return -1.0 + (np.arange(self.cols) + 0.5) * self.pixel_width

    def y_centers(self) -> np.ndarray:
        """y coordinates of pixel centers, top to bottom."""
        return 1.0 - (np.arange(self.rows) + 0.5) * self.pixel_height


@dataclass(frozen=True)
class Ray:
    """A line: direction (cos theta, sin theta), shifted by ``offset`` along its normal.

    ``theta`` is in radians. The line is {offset * n + t * d : t real} with
    d = (cos theta, sin theta) and n = (-sin theta, cos theta).
    """

    theta: float
    offset: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.offset)):
            raise ValueError(f"ray parameters must be finite, got {self!r}")


@dataclass(eq=False)
class SparseRow:
    """One row of the system matrix: pixel indices and intersection lengths.

    Indices are flat (row-major) pixel indices, strictly increasing; weights
    are the positive intersection lengths in domain units. ``norm_sq`` caches
    the squared Euclidean norm of the row.
    """

    indices: np.ndarray
    weights: np.ndarray
    norm_sq: float = field(init=False)

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.indices.ndim != 1 or self.indices.shape != self.weights.shape:
            raise ValueError("indices and weights must be matching 1-D arrays")
        if self.indices.size:
            if np.any(np.diff(self.indices) <= 0):
                raise ValueError("indices must be strictly increasing")
            if not np.all(np.isfinite(self.weights)) or np.any(self.weights <= 0.0):
                raise ValueError("weights must be positive and finite")
        self.norm_sq = float(self.weights @ self.weights)

    @property
    def nnz(self) -> int:
        return self.indices.size

    def dot(self, flat_image: np.ndarray) -> float:
        """Inner product with a flat image vector."""
        if self.indices.size == 0:
            return 0.0
        return float(self.weights @ flat_image[self.indices])


_EMPTY_ROW_ARGS = (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))


@dataclass(eq=False)
class ProjectionSystem:
    """Sparse row-wise system matrix, measurements, and the box constraint.

    Treated as immutable once measurements are assigned; the same instance can
    be shared read-only across concurrent reconstructions.
    """

    rows: list[SparseRow]
    b: np.ndarray
    box: tuple[float, float]
    grid: Grid

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.b.ndim != 1 or self.b.size != len(self.rows):
            raise ValueError(
                f"measurement vector length {self.b.size} != number of rows {len(self.rows)}"
            )
        self.box = check_box(*self.box)
        n = self.grid.n
        for row in self.rows:
            if row.nnz and int(row.indices[-1]) >= n:
                raise ValueError("row index exceeds grid size")

    @property
    def m(self) -> int:
        """Number of rays / matrix rows."""
        return len(self.rows)

    @property
    def n(self) -> int:
        """Number of pixels / matrix columns."""
        return self.grid.n

    def with_b(self, b) -> "ProjectionSystem":
        """A copy of this system with a new measurement vector."""
        return replace(self, b=np.asarray(b, dtype=np.float64))


def make_parallel_geometry(num_views, angle_start_deg, angle_step_deg,
                           num_rays, offset_min, offset_max) -> list[Ray]:
    """Build a parallel-beam acquisition as a flat, view-major list of rays.

    Parameters
    ----------
    num_views : int
        Number of view directions, at angles ``angle_start_deg + k * angle_step_deg``.
    angle_start_deg, angle_step_deg : float
        View angles in degrees; the step must be positive.
    num_rays : int
        Rays per view, with offsets equally spaced over
        ``[offset_min, offset_max]`` inclusive of both endpoints.
    offset_min, offset_max : float
        Detector range in domain units.

    Returns
    -------
    list of Ray
        ``num_views * num_rays`` rays ordered view-major, then by offset.
    """
    num_views = check_positive_int("num_views", num_views)
    num_rays = check_positive_int("num_rays", num_rays)
    if not angle_step_deg > 0:
        raise ValueError(f"angle_step_deg must be positive, got {angle_step_deg!r}")
    offsets = np.linspace(offset_min, offset_max, num_rays)
    rays = []
    for k in range(num_views):
        theta = math.radians(angle_start_deg + k * angle_step_deg)
        rays.extend(Ray(theta, float(s)) for s in offsets)
    return rays


def _empty_row() -> SparseRow:
    return SparseRow(*_EMPTY_ROW_ARGS)


def trace_ray(ray: Ray, grid: Grid) -> SparseRow:
    """Exact intersection lengths of a ray with every pixel it crosses.

    Walks the line through the regular grid: every axis-crossing parameter in
    the clipped parameter interval splits the path into segments that each lie
    in a single pixel, and the segment length is that pixel's weight. Misses
    return an empty row.
    """
    dx, dy = math.cos(ray.theta), math.sin(ray.theta)
    s = ray.offset
    # Canonical direction sign so that a ray and its reversed twin trace the
    # same arithmetic.
    if dy < 0.0 or (dy == 0.0 and dx < 0.0):
        dx, dy, s = -dx, -dy, -s
    px, py = -s * dy, s * dx

    t_lo, t_hi = -math.inf, math.inf
    for p, d in ((px, dx), (py, dy)):
        if d == 0.0:
            if not -1.0 <= p <= 1.0:
                return _empty_row()
        else:
            ta, tb = (-1.0 - p) / d, (1.0 - p) / d
            if ta > tb:
                ta, tb = tb, ta
            t_lo, t_hi = max(t_lo, ta), min(t_hi, tb)
    if not t_hi > t_lo:
        return _empty_row()

    crossings = [np.array([t_lo, t_hi])]
    if dx != 0.0:
        edges = -1.0 + np.arange(1, grid.cols) * grid.pixel_width
        t = (edges - px) / dx
        crossings.append(t[(t > t_lo) & (t < t_hi)])
    if dy != 0.0:
        edges = -1.0 + np.arange(1, grid.rows) * grid.pixel_height
        t = (edges - py) / dy
        crossings.append(t[(t > t_lo) & (t < t_hi)])
    ts = np.unique(np.concatenate(crossings))

    lengths = np.diff(ts)
    mids = 0.5 * (ts[:-1] + ts[1:])
    keep = lengths > _SLIVER
    lengths, mids = lengths[keep], mids[keep]
    if lengths.size == 0:
        return _empty_row()

    xs = px + mids * dx
    ys = py + mids * dy
    cols = np.clip(((xs + 1.0) / grid.pixel_width).astype(np.int64), 0, grid.cols - 1)
    rows_ = np.clip(((1.0 - ys) / grid.pixel_height).astype(np.int64), 0, grid.rows - 1)
    flat = rows_ * grid.cols + cols

    uniq, inverse = np.unique(flat, return_inverse=True)
    weights = np.bincount(inverse, weights=lengths, minlength=uniq.size)
    return SparseRow(uniq, weights)


def build_system(rays, grid: Grid, box=(0.0, 1.1)) -> ProjectionSystem:
    """Trace every ray into a system matrix; measurements start at zero.

    Rays that miss the domain keep their (empty) row so that row indices stay
    aligned with detector bins.
    """
    if not rays:
        raise ValueError("rays must be non-empty")
    rows = [trace_ray(ray, grid) for ray in rays]
    return ProjectionSystem(rows=rows, b=np.zeros(len(rows)), box=box, grid=grid)


def forward_project(system: ProjectionSystem, x) -> np.ndarray:
    """Apply the system matrix: component i is the line integral of x along ray i."""
    flat = as_image(x, system.grid).ravel()
    out = np.zeros(system.m)
    for i, row in enumerate(system.rows):
        if row.nnz:
            out[i] = row.weights @ flat[row.indices]
    return out


def add_noise(b, variance, seed) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise of the given variance to ``b``.

    Deterministic for a fixed seed.
    """
    variance = check_nonnegative("variance", variance)
    b = np.asarray(b, dtype=np.float64)
    rng = np.random.default_rng(seed)
    return b + rng.normal(0.0, math.sqrt(variance), size=b.shape)
