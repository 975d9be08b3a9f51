"""
Maximum-likelihood angle estimation.

The log-likelihood (constants dropped) is

    L(theta) = -sum_l ln det R_l - sum_l (y_l - u_l)^H R_l^-1 (y_l - u_l)

It is multimodal in angle, so estimation starts from the maximiser over a
coarse (theta1, theta2) grid and refines it by gradient ascent with a
backtracking step size. Angles are kept in [-pi/2, pi/2] by reflection,
which leaves every steering vector unchanged.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from analysis.sensing import (
    SensingModel,
    apply_inverse,
    dris_power,
    mean_derivatives,
    mean_vectors,
    outer_derivative,
    to_angles,
)
from channel.geometry import steering_ula
from config.settings import settings
from schemas.errors import DomainError
from waveform.solver import Waveform

logger = logging.getLogger(__name__)

ComplexArray = NDArray[np.complex128]


@dataclass
class EstimationResult:
    """Outcome of one MLE run."""

    theta_hat: tuple[float, float]
    iterations: int
    converged: bool
    final_gradient_norm: float
    log_likelihood: float = float("nan")
    stalled: bool = False


def wrap_angle(theta: float) -> float:
    """Reflect into [-pi/2, pi/2] preserving sin(theta)."""
    return float(np.arcsin(np.clip(np.sin(theta), -1.0, 1.0)))


def _check_observations(observations: ComplexArray, w: Waveform, model: SensingModel) -> None:
    if observations.shape != (model.n_s, w.frame_len):
        raise DomainError(
            f"observations {observations.shape} do not match N_S={model.n_s}, L={w.frame_len}"
        )


def _log_det(q: NDArray[np.float64], model: SensingModel) -> NDArray[np.float64]:
    """ln det R_l = (N_S - 1) ln s2 + ln(s2 + q_l N_S); independent of theta2."""
    s2 = model.sigma2_s
    return (model.n_s - 1) * math.log(s2) + np.log(s2 + q * model.n_s)


def log_likelihood(
    theta: Sequence[float], observations: ComplexArray, w: Waveform, model: SensingModel
) -> float:
    theta1, theta2 = to_angles(theta)
    _check_observations(observations, w, model)
    q = dris_power(w.x, model)
    resid = observations - mean_vectors(theta1, theta2, w.x, model)
    quad = np.real(np.sum(resid.conj() * apply_inverse(theta2, resid, q, model)))
    return float(-np.sum(_log_det(q, model)) - quad)


def likelihood_gradient(
    theta: Sequence[float], observations: ComplexArray, w: Waveform, model: SensingModel
) -> tuple[float, float]:
    """
    dL/dtheta1 = sum_l 2 Re{du_l^H/dtheta1 R_l^-1 r_l}
    dL/dtheta2 = sum_l 2 Re{du_l^H/dtheta2 R_l^-1 r_l}
               + sum_l r_l^H R_l^-1 dR_l R_l^-1 r_l - sum_l tr{R_l^-1 dR_l}
    """
    theta1, theta2 = to_angles(theta)
    _check_observations(observations, w, model)
    x = w.x
    q = dris_power(x, model)
    resid = observations - mean_vectors(theta1, theta2, x, model)
    v = apply_inverse(theta2, resid, q, model)
    du1, du2 = mean_derivatives(theta1, theta2, x, model)

    g1 = 2.0 * float(np.real(np.vdot(du1, v)))
    g2 = 2.0 * float(np.real(np.vdot(du2, v)))
    if model.dris_coeff > 0.0:
        d_outer = outer_derivative(model.n_s, theta2, model.delta)
        quad = np.real(np.sum(v.conj() * (d_outer @ v), axis=0))
        # tr{R^-1 dM} column-wise via R^-1 applied to dM's columns.
        inv_d = np.stack(
            [apply_inverse(theta2, d_outer, np.full(model.n_s, ql), model) for ql in q]
        )
        traces = np.real(np.trace(inv_d, axis1=1, axis2=2))
        g2 += float(np.sum(q * quad) - np.sum(q * traces))
    return g1, g2


# ---------------------------------------------------------------------------
# Grid initialisation
# ---------------------------------------------------------------------------


def grid_search_init(
    observations: ComplexArray,
    w: Waveform,
    model: SensingModel,
    spacing_deg: float | None = None,
) -> tuple[float, float]:
    """Maximiser of the log-likelihood over a uniform broadside grid."""
    _check_observations(observations, w, model)
    spacing = math.radians(spacing_deg or settings.estimator.grid_spacing_deg)
    grid = np.arange(-math.pi / 2.0 + spacing / 2.0, math.pi / 2.0, spacing)

    x = w.x
    n_s = model.n_s
    amp = model.amplitude
    q = dris_power(x, model)
    s2 = model.sigma2_s
    c = q / (s2 * s2 + q * n_s * s2)

    # b[g1, l] = a_B(theta1)^T x_l ; p[g2, l] = a_S(theta2)^H y_l
    a_b = np.stack([steering_ula(model.n_b, t, model.delta, centred=True) for t in grid])
    a_s = np.stack([steering_ula(n_s, t, model.delta, centred=True) for t in grid])
    b = amp * (a_b @ x)
    p = a_s.conj() @ observations
    y2 = np.sum(np.abs(observations) ** 2, axis=0)

    # ln det R_l does not depend on theta, so only the quadratic form matters.
    best = (-math.inf, 0, 0)
    for i in range(grid.size):
        bi = b[i][None, :]
        r2 = y2[None, :] - 2.0 * np.real(bi.conj() * p) + n_s * np.abs(bi) ** 2
        proj2 = np.abs(p - n_s * bi) ** 2
        score = -np.sum(r2 / s2 - c[None, :] * proj2, axis=1)
        j = int(np.argmax(score))
        if score[j] > best[0]:
            best = (float(score[j]), i, j)
    return float(grid[best[1]]), float(grid[best[2]])


# ---------------------------------------------------------------------------
# Gradient ascent
# ---------------------------------------------------------------------------


def mle_estimate(
    observations: ComplexArray,
    w: Waveform,
    model: SensingModel,
    init: Sequence[float] | None = None,
    zeta: float | None = None,
    sigma_thresh: float | None = None,
    max_iter: int | None = None,
) -> EstimationResult:
    """
    Gradient ascent theta <- theta + zeta grad L until ||delta theta||^2 <= sigma_thresh.

    ``zeta`` defaults to a step that moves half a grid cell at the start; it is
    halved until the likelihood does not decrease and doubled after each
    accepted step.
    """
    sigma_thresh = sigma_thresh if sigma_thresh is not None else settings.estimator.sigma_thresh
    max_iter = max_iter if max_iter is not None else settings.estimator.max_iterations
    if zeta is not None and not zeta > 0.0:
        raise DomainError(f"zeta must be positive, got {zeta!r}")
    if not sigma_thresh > 0.0:
        raise DomainError(f"sigma_thresh must be positive, got {sigma_thresh!r}")

    theta = np.array(
        to_angles(init) if init is not None else grid_search_init(observations, w, model)
    )
    theta = np.array([wrap_angle(t) for t in theta])
    value = log_likelihood(theta, observations, w, model)
    grad = np.array(likelihood_gradient(theta, observations, w, model))

    if zeta is None:
        norm = float(np.linalg.norm(grad))
        cell = math.radians(settings.estimator.grid_spacing_deg) / 2.0
        zeta = cell / norm if norm > 0.0 else 1.0

    converged = False
    stalled = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        step_size = zeta
        candidate: NDArray[np.float64] | None = None
        cand_value = value
        for _ in range(settings.estimator.max_halvings):
            trial = np.array([wrap_angle(t) for t in theta + step_size * grad])
            trial_value = log_likelihood(trial, observations, w, model)
            if trial_value >= value:
                candidate, cand_value = trial, trial_value
                break
            step_size *= 0.5

        if candidate is None:
            # every halving lowered the likelihood
            stalled = True
            break
        moved = float(np.sum((candidate - theta) ** 2))
        theta, value = candidate, cand_value
        zeta = 2.0 * step_size
        grad = np.array(likelihood_gradient(theta, observations, w, model))
        if moved <= sigma_thresh:
            converged = True
            break

    if stalled:
        logger.warning("MLE stalled after %d iterations: no ascent step found", iterations)
    elif not converged:
        logger.warning("MLE did not converge within %d iterations", max_iter)
    return EstimationResult(
        theta_hat=(float(theta[0]), float(theta[1])),
        iterations=iterations,
        converged=converged,
        final_gradient_norm=float(np.linalg.norm(grad)),
        log_likelihood=value,
        stalled=stalled,
    )
