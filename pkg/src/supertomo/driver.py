"""The superiorized outer loop, residual metrics, and run histories.

Each outer iteration perturbs the current iterate with the configured
strategy, applies one ART sweep, and accepts the result only when the
perturbation did not increase the objective AND the residual strictly
decreased; otherwise the step budget beta shrinks geometrically and the
attempt repeats. Beta also shrinks once per accepted step, so the total
perturbation is summable by construction.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._validation import (
    as_image,
    check_nonnegative,
    check_open_interval,
    check_positive,
    check_positive_int,
)
from .feasibility import art_sweep
from .perturbation import Perturber, tv_value
from .projector import ProjectionSystem

__all__ = [
    "TERMINATION_RES",
    "TERMINATION_MAX_OUTER",
    "TERMINATION_STALL",
    "SuperConfig",
    "IterRecord",
    "RunResult",
    "res",
    "dist_normalized",
    "mse",
    "superiorize",
    "write_history_csv",
    "HISTORY_HEADER",
]

TERMINATION_RES = "res-threshold"
TERMINATION_MAX_OUTER = "max-outer"
TERMINATION_STALL = "inner-exhausted-fallback-stall"

HISTORY_HEADER = "k,beta_used,inner_attempts,res,phi,mse,perturb_norm,elapsed_s"


def res(x, system: ProjectionSystem) -> float:
    """Unnormalized residual ||Ax - b||_2, the distance-to-feasibility proxy."""
    flat = as_image(x, system.grid).ravel()
    acc = 0.0
    for i, row in enumerate(system.rows):
        r = system.b[i] - row.dot(flat)
        acc += r * r
    return math.sqrt(acc)


def dist_normalized(x, system: ProjectionSystem) -> float:
    """Row-normalized residual; empty rows are skipped.

    Each term divides the row residual by the row norm, which makes the value
    invariant to row scaling but sensitive to near-degenerate rows, so it
    ships as a metric only.
    """
    flat = as_image(x, system.grid).ravel()
    acc = 0.0
    for i, row in enumerate(system.rows):
        if row.nnz == 0:
            continue
        r = (system.b[i] - row.dot(flat)) / math.sqrt(row.norm_sq)
        acc += r * r
    return math.sqrt(acc)


def mse(x, reference) -> float:
    """Root-mean-square error between an image and a reference of equal shape."""
    x = as_image(x)
    reference = as_image(reference)
    if x.shape != reference.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {reference.shape}")
    d = x - reference
    return math.sqrt(float((d * d).mean()))


@dataclass(frozen=True)
class SuperConfig:
    """Configuration of one superiorized run.

    ``epsilon`` is the absolute residual threshold; if ``epsilon_rel`` is
    given, the effective threshold becomes ``max(epsilon, epsilon_rel * ||b||)``.
    ``perturber=None`` disables perturbation entirely (plain feasibility run).
    """

    beta0: float = 10.0
    gamma: float = 0.5
    epsilon: float = 0.0
    epsilon_rel: float | None = None
    max_outer: int = 300
    max_inner_attempts: int = 50
    perturber: Perturber | None = None
    record_history: bool = True

    def __post_init__(self):
        check_positive("beta0", self.beta0)
        check_open_interval("gamma", self.gamma, 0.0, 1.0)
        check_nonnegative("epsilon", self.epsilon)
        if self.epsilon_rel is not None:
            check_nonnegative("epsilon_rel", self.epsilon_rel)
        check_positive_int("max_outer", self.max_outer)
        check_positive_int("max_inner_attempts", self.max_inner_attempts)


@dataclass
class IterRecord:
    """One accepted outer iteration.

    ``beta_used`` is the step budget at acceptance; 0.0 marks an unperturbed
    fallback step. ``phi`` is always the interior TV of the new iterate so
    that runs with different perturbers stay comparable. ``phi_before`` and
    ``phi_perturbed`` are the perturber's own objective at x^k and y^k, kept
    for auditing the acceptance condition.
    """

    k: int
    beta_used: float
    inner_attempts: int
    res: float
    phi: float
    mse: float | None
    perturb_norm: float
    elapsed: float
    phi_before: float = math.nan
    phi_perturbed: float = math.nan


@dataclass
class RunResult:
    image: np.ndarray
    records: list[IterRecord] = field(default_factory=list)
    termination: str = TERMINATION_MAX_OUTER
    initial_res: float = math.nan
    n_outer: int = 0


def _effective_epsilon(config: SuperConfig, system: ProjectionSystem) -> float:
    eps = config.epsilon
    if config.epsilon_rel is not None:
        eps = max(eps, config.epsilon_rel * float(np.linalg.norm(system.b)))
    return eps


def superiorize(system: ProjectionSystem, x0, config: SuperConfig,
                ground_truth=None) -> RunResult:
    """Run the superiorized feasibility-seeking iteration.

    Parameters
    ----------
    system : ProjectionSystem
        Matrix, measurements and box; shared read-only.
    x0 : array
        Start image, matching the system grid.
    config : SuperConfig
        Loop parameters and the perturbation strategy.
    ground_truth : array, optional
        When given, the per-iteration RMS error against it is recorded.

    Returns
    -------
    RunResult
        Final image, per-iteration records, and the termination reason:
        the residual threshold was reached, the outer budget ran out, or
        neither a perturbed nor an unperturbed step could decrease the
        residual any further.

    Notes
    -----
    The printed form of the underlying scheme can retry the perturbation
    forever; after ``max_inner_attempts`` rejections this implementation
    falls back to one unperturbed sweep (recorded with ``beta_used = 0``)
    and terminates if even that fails to strictly decrease the residual.
    """
    x = as_image(x0, system.grid).copy()
    truth = as_image(ground_truth, system.grid) if ground_truth is not None else None
    eps = _effective_epsilon(config, system)
    perturber = config.perturber

    result = RunResult(image=x, initial_res=res(x, system))
    res_x = result.initial_res
    beta = config.beta0
    track_tv = min(x.shape) >= 2
    k = 0
    while True:
        if res_x < eps:
            result.termination = TERMINATION_RES
            break
        if k >= config.max_outer:
            result.termination = TERMINATION_MAX_OUTER
            break

        t_start = time.perf_counter()
        accepted = False
        attempts = 0
        beta_used = 0.0
        perturb_norm = 0.0
        phi_x = math.nan
        phi_y = math.nan
        candidate = None
        res_c = math.inf

        if perturber is not None:
            phi_x = perturber.objective(x)
            while attempts < config.max_inner_attempts:
                attempts += 1
                y = perturber.perturb(x, beta)
                phi_y = perturber.objective(y)
                candidate = art_sweep(y, system)
                res_c = res(candidate, system)
                if phi_y <= phi_x and res_c < res_x:
                    accepted = True
                    beta_used = beta
                    perturb_norm = float(np.linalg.norm(y - x))
                    break
                beta *= config.gamma

        if not accepted:
            # Unperturbed fallback; also the entire step when no perturber is set.
            attempts += 1
            candidate = art_sweep(x, system)
            res_c = res(candidate, system)
            phi_y = phi_x
            if not res_c < res_x:
                result.termination = TERMINATION_STALL
                break

        x = candidate
        res_x = res_c
        beta *= config.gamma
        if config.record_history:
            result.records.append(IterRecord(
                k=k,
                beta_used=beta_used,
                inner_attempts=attempts,
                res=res_x,
                phi=tv_value(x) if track_tv else 0.0,
                mse=mse(x, truth) if truth is not None else None,
                perturb_norm=perturb_norm,
                elapsed=time.perf_counter() - t_start,
                phi_before=phi_x,
                phi_perturbed=phi_y,
            ))
        k += 1

    result.image = x
    result.n_outer = k
    return result


def write_history_csv(records, path):
    """Write per-iteration records as CSV (LF line endings, '.' decimals)."""
    lines = [HISTORY_HEADER]
    for r in records:
        mse_text = "" if r.mse is None else repr(float(r.mse))
        lines.append(",".join([
            str(r.k),
            repr(float(r.beta_used)),
            str(r.inner_attempts),
            repr(float(r.res)),
            repr(float(r.phi)),
            mse_text,
            repr(float(r.perturb_norm)),
            repr(float(r.elapsed)),
        ]))
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
