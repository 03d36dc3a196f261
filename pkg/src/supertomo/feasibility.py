"""Metric projections onto the constraint sets and the cyclic ART sweep.

The feasible set is the intersection of the measurement hyperplanes
{x : <a_i, x> = b_i} with a box of admissible intensities. One ART sweep
projects onto every hyperplane in detector order and finishes with the box
projection; the composed map is nonexpansive.
"""

from __future__ import annotations

import numpy as np

from ._validation import as_image, check_box
from .projector import ProjectionSystem, SparseRow

__all__ = ["project_hyperplane", "project_box", "art_sweep"]


def _project_row_inplace(flat: np.ndarray, row: SparseRow, b_i: float):
    # Empty rows carry no constraint; norm_sq > 0 whenever nnz > 0.
    if row.nnz == 0:
        return
    idx, w = row.indices, row.weights
    step = (b_i - w @ flat[idx]) / row.norm_sq
    flat[idx] += step * w


def project_hyperplane(x, row: SparseRow, b_i: float) -> np.ndarray:
    """Orthogonal projection of an image onto {x : <a_i, x> = b_i}.

    Moves x along the row direction by the scaled residual; only pixels in the
    row's support change. An empty row returns x unchanged.
    """
    x = as_image(x)
    out = x.copy()
    _project_row_inplace(out.ravel(), row, float(b_i))
    return out


def project_box(x, lo, hi) -> np.ndarray:
    """Componentwise clamp of an image to [lo, hi]."""
    lo, hi = check_box(lo, hi)
    return np.clip(as_image(x), lo, hi)


def art_sweep(x, system: ProjectionSystem) -> np.ndarray:
    """One full cyclic ART pass: all hyperplanes in row order, then the box.

    The output always lies inside the system's box. The sweep mutates a
    private working copy; the input image is untouched.
    """
    out = as_image(x, system.grid).copy()
    flat = out.ravel()
    b = system.b
    for i, row in enumerate(system.rows):
        _project_row_inplace(flat, row, b[i])
    lo, hi = system.box
    np.clip(out, lo, hi, out=out)
    return out
