"""Built-in test phantoms rasterized by pixel-center sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_int
from .projector import Grid

__all__ = ["Ellipse", "SHEPP_LOGAN_ELLIPSES", "rasterize_ellipses", "shepp_logan"]


@dataclass(frozen=True)
class Ellipse:
    """An ellipse overlay: its intensity delta adds wherever it covers a point.

    ``a`` and ``b`` are the semi-axes along the (rotated) x and y directions,
    ``rot_deg`` the counterclockwise rotation, coordinates in domain units.
    """

    cx: float
    cy: float
    a: float
    b: float
    rot_deg: float
    delta: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"semi-axes must be positive, got a={self.a!r}, b={self.b!r}")

    def covers(self, x, y):
        """Boolean mask of points inside the ellipse (boundary included)."""
        phi = math.radians(self.rot_deg)
        u = (x - self.cx) * math.cos(phi) + (y - self.cy) * math.sin(phi)
        v = -(x - self.cx) * math.sin(phi) + (y - self.cy) * math.cos(phi)
        return (u / self.a) ** 2 + (v / self.b) ** 2 <= 1.0


# The standard head phantom: ten ellipses, outer shell at intensity 1.0.
# Deltas accumulate where ellipses overlap; values stay within [0, 1.02].
SHEPP_LOGAN_ELLIPSES = (
    Ellipse(0.0, 0.0, 0.69, 0.92, 0.0, 1.0),
    Ellipse(0.0, -0.0184, 0.6624, 0.8740, 0.0, -0.98),
    Ellipse(0.22, 0.0, 0.11, 0.31, -18.0, -0.02),
    Ellipse(-0.22, 0.0, 0.16, 0.41, 18.0, -0.02),
    Ellipse(0.0, 0.35, 0.21, 0.25, 0.0, 0.01),
    Ellipse(0.0, 0.1, 0.046, 0.046, 0.0, 0.01),
    Ellipse(0.0, -0.1, 0.046, 0.046, 0.0, 0.01),
    Ellipse(-0.08, -0.605, 0.046, 0.023, 0.0, 0.01),
    Ellipse(0.0, -0.605, 0.023, 0.023, 0.0, 0.01),
    Ellipse(0.06, -0.605, 0.023, 0.046, 0.0, 0.01),
)


def rasterize_ellipses(ellipses, rows, cols) -> np.ndarray:
    """Accumulate ellipse intensity deltas at pixel centers.

    Pure pointwise sampling: the value of a pixel is the sum of deltas of all
    ellipses covering its center. Deterministic; no clamping is applied.
    """
    grid = Grid(rows, cols)
    x = grid.x_centers()[np.newaxis, :]
    y = grid.y_centers()[:, np.newaxis]
    image = np.zeros(grid.shape)
    for e in ellipses:
        image += np.where(e.covers(x, y), e.delta, 0.0)
    return image


def shepp_logan(rows, cols) -> np.ndarray:
    """The standard Shepp-Logan head phantom on a ``rows x cols`` grid.

    Grids smaller than 8 pixels per side are rejected; the shell features are
    meaningless below that.
    """
    rows = check_positive_int("rows", rows)
    cols = check_positive_int("cols", cols)
    if rows < 8 or cols < 8:
        raise ValueError(f"phantom grid must be at least 8x8, got {rows}x{cols}")
    return rasterize_ellipses(SHEPP_LOGAN_ELLIPSES, rows, cols)
