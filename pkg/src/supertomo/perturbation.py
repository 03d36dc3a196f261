"""Objective-reducing perturbations: proximal maps and the subgradient baseline.

A perturber turns the current iterate x and a step budget beta into a
perturbed point y. The proximal perturbers return (an approximation of)

    argmin_y  phi(y) + ||y - x||^2 / (2 beta),

which guarantees phi(y) <= phi(x) by construction. The classic baseline
instead walks a fixed distance beta along a negated unit subgradient of the
total variation, which guarantees only the step length.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from ._validation import as_image, check_open_interval, check_positive, check_positive_int

__all__ = [
    "prox_l0",
    "prox_l1",
    "prox_l2",
    "tv_value",
    "tv_value_full",
    "grad",
    "div",
    "prox_tv",
    "smoothed_tv_gradient",
    "classic_subgrad_perturb",
    "TVProxParams",
    "Perturber",
    "L0Prox",
    "L1Prox",
    "L2Prox",
    "TVProx",
    "TVSubgradient",
    "make_perturber",
    "perturb",
    "PERTURBER_KINDS",
]


def prox_l0(x, beta) -> np.ndarray:
    """Hard threshold: keep entries with |x_i| > beta, zero the rest.

    Experimental: the counting objective is non-convex, so the convergence
    guarantees of the proximal perturbers do not cover this map.
    """
    beta = check_positive("beta", beta)
    x = np.asarray(x, dtype=np.float64)
    return np.where(np.abs(x) > beta, x, 0.0)


def prox_l1(x, beta) -> np.ndarray:
    """Soft threshold: shrink each entry toward zero by beta."""
    beta = check_positive("beta", beta)
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - beta, 0.0)


def prox_l2(x, beta) -> np.ndarray:
    """Uniform shrinkage x / (1 + beta)."""
    beta = check_positive("beta", beta)
    x = np.asarray(x, dtype=np.float64)
    return x / (1.0 + beta)


def tv_value(x) -> float:
    """Isotropic total variation over interior differences.

    Sums sqrt(dv^2 + dh^2) over all pixels that have both a lower and a right
    neighbor; the last row and column contribute no terms of their own. This
    is the reporting metric used in run histories.
    """
    x = as_image(x)
    if x.shape[0] < 2 or x.shape[1] < 2:
        raise ValueError(f"total variation needs at least a 2x2 image, got {x.shape}")
    dv = x[1:, :-1] - x[:-1, :-1]
    dh = x[:-1, 1:] - x[:-1, :-1]
    return float(np.sqrt(dv * dv + dh * dh).sum())


def tv_value_full(x) -> float:
    """Isotropic total variation consistent with :func:`grad`.

    Unlike :func:`tv_value` this includes the one-sided boundary terms (last
    row and column), so it is the exact objective that :func:`prox_tv`
    minimizes.
    """
    g = grad(x)
    return float(np.sqrt(g[..., 0] ** 2 + g[..., 1] ** 2).sum())


def grad(x) -> np.ndarray:
    """Forward-difference gradient with zero padding past the far edges.

    Returns a dual field of shape (rows, cols, 2); component 0 differences
    down the rows, component 1 across the columns.
    """
    x = as_image(x)
    g = np.zeros(x.shape + (2,))
    g[:-1, :, 0] = x[1:, :] - x[:-1, :]
    g[:, :-1, 1] = x[:, 1:] - x[:, :-1]
    return g


def div(p) -> np.ndarray:
    """Discrete divergence, the negative adjoint of :func:`grad`.

    Satisfies <grad x, p> = -<x, div p> exactly in exact arithmetic.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 3 or p.shape[2] != 2:
        raise ValueError(f"expected a field of shape (rows, cols, 2), got {p.shape}")
    if p.shape[0] < 2 or p.shape[1] < 2:
        raise ValueError(f"field must be at least 2x2, got {p.shape}")
    d = np.empty(p.shape[:2])
    d[0, :] = p[0, :, 0]
    d[1:-1, :] = p[1:-1, :, 0] - p[:-2, :, 0]
    d[-1, :] = -p[-2, :, 0]
    d[:, 0] += p[:, 0, 1]
    d[:, 1:-1] += p[:, 1:-1, 1] - p[:, :-2, 1]
    d[:, -1] -= p[:, -2, 1]
    return d


@dataclass(frozen=True)
class TVProxParams:
    """Dual-iteration parameters for :func:`prox_tv`.

    ``tau`` must stay strictly below 1/8 for the dual step to contract;
    ``iters`` trades inner cost against prox accuracy.
    """

    tau: float = 0.12
    iters: int = 50

    def __post_init__(self):
        check_open_interval("tau", self.tau, 0.0, 0.125)
        check_positive_int("iters", self.iters)


def prox_tv(x, beta, params: TVProxParams | None = None) -> np.ndarray:
    """Approximate TV proximal map via the projected dual fixed-point iteration.

    Starting from a zero dual field p, runs exactly ``params.iters`` updates

        p <- (p + tau * grad(div p - x / beta)) / (1 + tau * |grad(div p - x / beta)|)

    and returns ``x - beta * div(p)``. The iteration keeps |p| <= 1 pixelwise,
    and the returned point never increases
    ``tv_value_full(y) + ||y - x||^2 / (2 beta)`` above its value at y = x.
    """
    if params is None:
        params = TVProxParams()
    beta = check_positive("beta", beta)
    x = as_image(x)
    if x.shape[0] < 2 or x.shape[1] < 2:
        raise ValueError(f"prox_tv needs at least a 2x2 image, got {x.shape}")
    tau = params.tau
    scaled = x / beta
    p = np.zeros(x.shape + (2,))
    for _ in range(params.iters):
        g = grad(div(p) - scaled)
        mag = np.sqrt(g[..., 0] ** 2 + g[..., 1] ** 2)
        p += tau * g
        p /= (1.0 + tau * mag)[..., np.newaxis]
    return x - beta * div(p)


def smoothed_tv_gradient(x, epsilon) -> np.ndarray:
    """Gradient of the smoothed interior TV, sqrt(dv^2 + dh^2 + epsilon^2) per term."""
    epsilon = check_positive("epsilon", epsilon)
    x = as_image(x)
    if x.shape[0] < 2 or x.shape[1] < 2:
        raise ValueError(f"total variation needs at least a 2x2 image, got {x.shape}")
    dv = x[1:, :-1] - x[:-1, :-1]
    dh = x[:-1, 1:] - x[:-1, :-1]
    inv = 1.0 / np.sqrt(dv * dv + dh * dh + epsilon * epsilon)
    u = np.zeros_like(x)
    u[:-1, :-1] -= (dv + dh) * inv
    u[1:, :-1] += dv * inv
    u[:-1, 1:] += dh * inv
    return u


def classic_subgrad_perturb(x, beta, epsilon_smooth=1e-8) -> np.ndarray:
    """Fixed-direction baseline: step beta along the negated unit TV subgradient.

    Uses the smoothed-TV gradient as a deterministic subgradient choice; a
    constant image has a zero subgradient and is returned unchanged. Whenever
    the subgradient is nonzero, ||y - x|| equals beta exactly.
    """
    beta = check_positive("beta", beta)
    u = smoothed_tv_gradient(x, epsilon_smooth)
    norm = float(np.linalg.norm(u))
    x = as_image(x)
    if norm == 0.0:
        return x.copy()
    return x - (beta / norm) * u


class Perturber:
    """Strategy producing the perturbed point y from (x, beta).

    ``objective`` is the functional the strategy aims to reduce; the driver
    uses it in the acceptance test.
    """

    kind: ClassVar[str]

    def perturb(self, x, beta) -> np.ndarray:
        raise NotImplementedError

    def objective(self, x) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class L0Prox(Perturber):
    """Hard-threshold perturber for the counting objective (experimental)."""

    kind: ClassVar[str] = "prox-l0"

    def perturb(self, x, beta):
        return prox_l0(x, beta)

    def objective(self, x):
        return float(np.count_nonzero(np.asarray(x)))


@dataclass(frozen=True)
class L1Prox(Perturber):
    kind: ClassVar[str] = "prox-l1"

    def perturb(self, x, beta):
        return prox_l1(x, beta)

    def objective(self, x):
        return float(np.abs(np.asarray(x, dtype=np.float64)).sum())


@dataclass(frozen=True)
class L2Prox(Perturber):
    kind: ClassVar[str] = "prox-l2"

    def perturb(self, x, beta):
        return prox_l2(x, beta)

    def objective(self, x):
        x = np.asarray(x, dtype=np.float64)
        return 0.5 * float((x * x).sum())


@dataclass(frozen=True)
class TVProx(Perturber):
    """Proximal TV perturber; the objective is the grad-consistent TV."""

    params: TVProxParams = TVProxParams()
    kind: ClassVar[str] = "prox-tv"

    def perturb(self, x, beta):
        return prox_tv(x, beta, self.params)

    def objective(self, x):
        return tv_value_full(x)


@dataclass(frozen=True)
class TVSubgradient(Perturber):
    """Classic superiorization baseline; the objective is the interior TV."""

    epsilon_smooth: float = 1e-8
    kind: ClassVar[str] = "classic-subgrad-tv"

    def __post_init__(self):
        check_positive("epsilon_smooth", self.epsilon_smooth)

    def perturb(self, x, beta):
        return classic_subgrad_perturb(x, beta, self.epsilon_smooth)

    def objective(self, x):
        return tv_value(x)


PERTURBER_KINDS = ("prox-l0", "prox-l1", "prox-l2", "prox-tv", "classic-subgrad-tv")


def make_perturber(kind, *, tau=0.12, iters=50, epsilon_smooth=1e-8) -> Perturber:
    """Build a perturber from its kind string; extra parameters apply where relevant."""
    if kind == "prox-l0":
        return L0Prox()
    if kind == "prox-l1":
        return L1Prox()
    if kind == "prox-l2":
        return L2Prox()
    if kind == "prox-tv":
        return TVProx(TVProxParams(tau=tau, iters=iters))
    if kind == "classic-subgrad-tv":
        return TVSubgradient(epsilon_smooth=epsilon_smooth)
    raise ValueError(f"unknown perturber kind {kind!r}; expected one of {PERTURBER_KINDS}")


def perturb(perturber: Perturber, x, beta) -> np.ndarray:
    """Apply a perturber; equivalent to ``perturber.perturb(x, beta)``."""
    return perturber.perturb(x, beta)
