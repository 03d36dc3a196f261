"""Scikit-learn style estimator wrapping the superiorized reconstruction."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .driver import SuperConfig, superiorize
from .perturbation import make_perturber
from .projector import ProjectionSystem, forward_project

__all__ = ["SuperiorizedART", "RECONSTRUCTION_METHODS"]

RECONSTRUCTION_METHODS = ("tv-pps", "tv-s", "art", "prox-l0", "prox-l1", "prox-l2")

_METHOD_TO_KIND = {
    "tv-pps": "prox-tv",
    "tv-s": "classic-subgrad-tv",
    "art": None,
    "prox-l0": "prox-l0",
    "prox-l1": "prox-l1",
    "prox-l2": "prox-l2",
}


class SuperiorizedART(BaseEstimator):
    """Superiorized ART reconstruction with an estimator interface.

    Parameters
    ----------
    method : str
        "tv-pps" (proximal TV perturbation), "tv-s" (classic subgradient
        baseline), "art" (no perturbation), or one of "prox-l0", "prox-l1",
        "prox-l2".
    beta0, gamma : float
        Initial perturbation budget and its shrink factor in (0, 1).
    epsilon, epsilon_rel : float
        Absolute and (optional) relative residual stopping thresholds.
    max_outer, max_inner_attempts : int
        Outer iteration budget and perturbation retries per step.
    tv_tau, tv_iters : float, int
        Dual-iteration parameters of the TV proximal map.
    subgrad_smoothing : float
        Smoothing used by the baseline's TV subgradient.
    record_history : bool
        Keep per-iteration records on the fitted estimator.

    Attributes
    ----------
    image_ : ndarray
        Reconstructed image.
    records_ : list of IterRecord
        Per-iteration history (empty when ``record_history=False``).
    termination_reason_ : str
        Why the run stopped.
    n_iter_ : int
        Number of accepted outer iterations.

    Examples
    --------
    >>> recon = SuperiorizedART(method="tv-pps", epsilon=0.01).fit(system)
    >>> recon.image_.shape == system.grid.shape
    True
    """

    def __init__(self, method="tv-pps", beta0=10.0, gamma=0.5, epsilon=0.0,
                 epsilon_rel=None, max_outer=300, max_inner_attempts=50,
                 tv_tau=0.12, tv_iters=50, subgrad_smoothing=1e-8,
                 record_history=True):
        self.method = method
        self.beta0 = beta0
        self.gamma = gamma
        self.epsilon = epsilon
        self.epsilon_rel = epsilon_rel
        self.max_outer = max_outer
        self.max_inner_attempts = max_inner_attempts
        self.tv_tau = tv_tau
        self.tv_iters = tv_iters
        self.subgrad_smoothing = subgrad_smoothing
        self.record_history = record_history

    def _build_config(self) -> SuperConfig:
        if self.method not in _METHOD_TO_KIND:
            raise ValueError(
                f"unknown method {self.method!r}; expected one of {RECONSTRUCTION_METHODS}"
            )
        kind = _METHOD_TO_KIND[self.method]
        perturber = None
        if kind is not None:
            perturber = make_perturber(
                kind,
                tau=self.tv_tau,
                iters=self.tv_iters,
                epsilon_smooth=self.subgrad_smoothing,
            )
        return SuperConfig(
            beta0=self.beta0,
            gamma=self.gamma,
            epsilon=self.epsilon,
            epsilon_rel=self.epsilon_rel,
            max_outer=self.max_outer,
            max_inner_attempts=self.max_inner_attempts,
            perturber=perturber,
            record_history=self.record_history,
        )

    def fit(self, system: ProjectionSystem, b=None, x0=None, ground_truth=None):
        """Reconstruct from a projection system.

        ``b`` overrides the measurements carried by the system; ``x0``
        defaults to the zero image. Returns self.
        """
        if not isinstance(system, ProjectionSystem):
            raise TypeError(f"expected a ProjectionSystem, got {type(system).__name__}")
        if b is not None:
            system = system.with_b(b)
        if x0 is None:
            x0 = np.zeros(system.grid.shape)
        config = self._build_config()
        result = superiorize(system, x0, config, ground_truth=ground_truth)
        self.system_ = system
        self.result_ = result
        self.image_ = result.image
        self.records_ = result.records
        self.termination_reason_ = result.termination
        self.n_iter_ = result.n_outer
        return self

    def predict(self, system: ProjectionSystem | None = None) -> np.ndarray:
        """Forward-project the reconstruction, by default onto the fitted geometry."""
        check_is_fitted(self, "image_")
        if system is None:
            system = self.system_
        return forward_project(system, self.image_)
