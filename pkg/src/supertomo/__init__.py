"""Superiorized feasibility-seeking reconstruction for parallel-beam tomography.

The package couples a cyclic ART (Kaczmarz) feasibility iteration with small
objective-reducing perturbations. Perturbations are computed either as a
proximal point of the regularizer (soft/hard/quadratic shrinkage, or a dual
fixed-point iteration for total variation) or as the classic fixed-length
step along a negated unit subgradient.
"""

from .driver import (
    HISTORY_HEADER,
    TERMINATION_MAX_OUTER,
    TERMINATION_RES,
    TERMINATION_STALL,
    IterRecord,
    RunResult,
    SuperConfig,
    dist_normalized,
    mse,
    res,
    superiorize,
    write_history_csv,
)
from .estimator import RECONSTRUCTION_METHODS, SuperiorizedART
from .feasibility import art_sweep, project_box, project_hyperplane
from .io import (
    DimensionOverflowError,
    MalformedFileError,
    load_image,
    load_projections,
    load_system,
    save_image,
    save_pgm,
    save_projections,
    save_system,
)
from .perturbation import (
    PERTURBER_KINDS,
    L0Prox,
    L1Prox,
    L2Prox,
    Perturber,
    TVProx,
    TVProxParams,
    TVSubgradient,
    classic_subgrad_perturb,
    div,
    grad,
    make_perturber,
    perturb,
    prox_l0,
    prox_l1,
    prox_l2,
    prox_tv,
    smoothed_tv_gradient,
    tv_value,
    tv_value_full,
)
from .phantoms import SHEPP_LOGAN_ELLIPSES, Ellipse, rasterize_ellipses, shepp_logan
from .projector import (
    Grid,
    ProjectionSystem,
    Ray,
    SparseRow,
    add_noise,
    build_system,
    forward_project,
    make_parallel_geometry,
    trace_ray,
)

__version__ = "0.1.0"

__all__ = [
    "Grid", "Ray", "SparseRow", "ProjectionSystem",
    "make_parallel_geometry", "trace_ray", "build_system",
    "forward_project", "add_noise",
    "Ellipse", "SHEPP_LOGAN_ELLIPSES", "rasterize_ellipses", "shepp_logan",
    "save_image", "load_image", "save_pgm", "save_system", "load_system",
    "save_projections", "load_projections",
    "MalformedFileError", "DimensionOverflowError",
    "project_hyperplane", "project_box", "art_sweep",
    "prox_l0", "prox_l1", "prox_l2", "prox_tv",
    "tv_value", "tv_value_full", "grad", "div",
    "smoothed_tv_gradient", "classic_subgrad_perturb",
    "TVProxParams", "Perturber", "L0Prox", "L1Prox", "L2Prox", "TVProx",
    "TVSubgradient", "make_perturber", "perturb", "PERTURBER_KINDS",
    "SuperConfig", "IterRecord", "RunResult",
    "res", "dist_normalized", "mse", "superiorize", "write_history_csv",
    "HISTORY_HEADER",
    "TERMINATION_RES", "TERMINATION_MAX_OUTER", "TERMINATION_STALL",
    "SuperiorizedART", "RECONSTRUCTION_METHODS",
    "__version__",
]
