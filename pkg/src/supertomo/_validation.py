"""Small argument-checking helpers shared across the package."""

import numpy as np


def check_positive(name, value):
    """Require a finite value > 0 and return it as float."""
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_nonnegative(name, value):
    value = float(value)
    if not np.isfinite(value) or value < 0.0:
        raise ValueError(f"{name} must be a nonnegative finite number, got {value!r}")
    return value


def check_positive_int(name, value):
    if int(value) != value or int(value) < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_open_interval(name, value, lo, hi):
    """Require lo < value < hi (strict) and return it as float."""
    value = float(value)
    if not (lo < value < hi):
        raise ValueError(f"{name} must lie strictly in ({lo}, {hi}), got {value!r}")
    return value


def check_box(lo, hi):
    lo, hi = float(lo), float(hi)
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
        raise ValueError(f"box bounds must be finite with lo <= hi, got ({lo!r}, {hi!r})")
    return lo, hi


def as_image(x, grid=None):
    """Coerce ``x`` to a 2-D float64 array, optionally checking it matches ``grid``."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image array, got shape {arr.shape}")
    if grid is not None and arr.shape != (grid.rows, grid.cols):
        raise ValueError(
            f"image shape {arr.shape} does not match grid ({grid.rows}, {grid.cols})"
        )
    return arr
