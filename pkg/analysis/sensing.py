"""
Sensing analysis — bistatic observation model, FIM and CRLB of (theta1, theta2).

Per symbol l the receiver sees y_l ~ CN(u_l, R_l) with

    u_l = chi sqrt(L_d1 L_d2) a_S(theta2) (a_B(theta1)^T x_l)
    R_l = q_l a_S(theta2) a_S(theta2)^H + sigma_s^2 I,
    q_l = chi^2 L_d2 L_cas N_D nu_bar ||x_l||^2

The DRIS only enters through the rank-one covariance term, which carries
theta2 information and no theta1 information. Steering vectors are columns
and the outer product is a a^H. Both ULAs are phase-referenced at their
centre, so a^H da/dtheta = 0 and the FIM is diagonal: the rank-one term only
removes theta1 information from the mean and only adds theta2 information
through the covariance.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray

from channel.assembly import ChannelSet, complex_gaussian, dris_sensing_paths
from channel.dris import DrisMoments, draw_reflection_states
from channel.geometry import steering_derivative, steering_ula
from schemas.errors import DomainError, NumericalError, UnidentifiableError
from schemas.scenario import DrisProfile
from waveform.solver import Waveform

logger = logging.getLogger(__name__)

ComplexArray = NDArray[np.complex128]
FloatArray = NDArray[np.float64]


@dataclass(frozen=True)
class SensingModel:
    """Everything the sensing statistics depend on besides the angles and X."""

    n_b: int
    n_s: int
    chi: float
    l_d1: float
    l_d2: float
    l_cas: float
    n_d: int
    nu_bar: float
    sigma2_s: float
    delta: float = 0.5

    @classmethod
    def from_channels(
        cls, channels: ChannelSet, chi: float, sigma2_s: float, moments: DrisMoments
    ) -> SensingModel:
        ls = channels.large_scale
        return cls(
            n_b=channels.n_b,
            n_s=channels.n_s,
            chi=chi,
            l_d1=ls.l_d1_s,
            l_d2=ls.l_d2_s,
            l_cas=ls.l_cas_s,
            n_d=channels.n_d,
            nu_bar=moments.nu_bar,
            sigma2_s=sigma2_s,
            delta=channels.delta,
        )

    def without_dris(self) -> SensingModel:
        return replace(self, n_d=0)

    @property
    def amplitude(self) -> float:
        """chi sqrt(L_d1 L_d2)."""
        return self.chi * math.sqrt(self.l_d1 * self.l_d2)

    @property
    def dris_coeff(self) -> float:
        """q_l / ||x_l||^2."""
        return self.chi**2 * self.l_d2 * self.l_cas * self.n_d * self.nu_bar


@dataclass
class SensingReport:
    """FIM and CRLBs (rad^2) for one waveform, with or without the DRIS."""

    fim: FloatArray
    crlb_theta1: float
    crlb_theta2: float
    with_dris: bool

    @property
    def crlb_deg2(self) -> tuple[float, float]:
        scale = (180.0 / math.pi) ** 2
        return self.crlb_theta1 * scale, self.crlb_theta2 * scale


# ---------------------------------------------------------------------------
# Mean and its derivatives
# ---------------------------------------------------------------------------


def steering_derivative_bs(theta1: float, n_b: int, delta: float = 0.5) -> ComplexArray:
    return steering_derivative(n_b, theta1, delta, centred=True)


def mean_vectors(
    theta1: float, theta2: float, x: ComplexArray, model: SensingModel
) -> ComplexArray:
    """Columns u_l, shape N_S x L."""
    a_s = steering_ula(model.n_s, theta2, model.delta, centred=True)
    proj = steering_ula(model.n_b, theta1, model.delta, centred=True) @ x
    return model.amplitude * a_s[:, None] * proj[None, :]


def mean_derivatives(
    theta1: float, theta2: float, x: ComplexArray, model: SensingModel
) -> tuple[ComplexArray, ComplexArray]:
    """(du/dtheta1, du/dtheta2), each N_S x L."""
    a_s = steering_ula(model.n_s, theta2, model.delta, centred=True)
    da_s = steering_derivative(model.n_s, theta2, model.delta, centred=True)
    proj = steering_ula(model.n_b, theta1, model.delta, centred=True) @ x
    dproj = steering_derivative_bs(theta1, model.n_b, model.delta) @ x
    amp = model.amplitude
    return amp * a_s[:, None] * dproj[None, :], amp * da_s[:, None] * proj[None, :]


# ---------------------------------------------------------------------------
# Covariance, its inverse and derivative
# ---------------------------------------------------------------------------


def dris_power(x: ComplexArray, model: SensingModel) -> FloatArray:
    """q_l for every column of x (or a single vector)."""
    return model.dris_coeff * np.sum(np.abs(x) ** 2, axis=0)


def covariance_rl(theta2: float, x_l: ComplexArray, model: SensingModel) -> ComplexArray:
    a = steering_ula(model.n_s, theta2, model.delta, centred=True)
    q = float(dris_power(x_l, model))
    return q * np.outer(a, a.conj()) + model.sigma2_s * np.eye(model.n_s)


def _sm_coefficient(q: FloatArray | float, model: SensingModel) -> FloatArray | float:
    s2 = model.sigma2_s
    return q / (s2 * s2 + q * model.n_s * s2)


def covariance_inverse(theta2: float, x_l: ComplexArray, model: SensingModel) -> ComplexArray:
    """Sherman-Morrison: (1/s2) I - q a a^H / (s2^2 + q N_S s2)."""
    if not model.sigma2_s > 0.0:
        raise NumericalError("sensing covariance is singular", {"sigma2_s": model.sigma2_s})
    a = steering_ula(model.n_s, theta2, model.delta, centred=True)
    c = _sm_coefficient(float(dris_power(x_l, model)), model)
    return np.eye(model.n_s) / model.sigma2_s - c * np.outer(a, a.conj())


def outer_derivative(n: int, theta: float, delta: float = 0.5) -> ComplexArray:
    """
    d(a a^H)/dtheta as a Hadamard product.

    With the row-vector product M = conj(a) a^T, dM/dtheta = j 2pi delta cos(theta) D o M
    where D[m, n] = n - m; a a^H is M transposed.
    """
    a = steering_ula(n, theta, delta, centred=True)
    idx = np.arange(n)
    d_mat = idx[None, :] - idx[:, None]
    m_mat = np.outer(a.conj(), a)
    return (1j * 2.0 * np.pi * delta * np.cos(theta) * d_mat * m_mat).T


def covariance_derivative(
    theta2: float, x_l: ComplexArray, model: SensingModel
) -> ComplexArray:
    """dR_l/dtheta2; dR_l/dtheta1 is zero."""
    q = float(dris_power(x_l, model))
    return q * outer_derivative(model.n_s, theta2, model.delta)


def apply_inverse(
    theta2: float, v: ComplexArray, q: FloatArray, model: SensingModel
) -> ComplexArray:
    """R_l^-1 v_l for every column l, without forming the inverses."""
    a = steering_ula(model.n_s, theta2, model.delta, centred=True)
    c = _sm_coefficient(q, model)
    return v / model.sigma2_s - a[:, None] * (c * (a.conj() @ v))[None, :]


def inverse_stack(theta2: float, q: FloatArray, model: SensingModel) -> ComplexArray:
    """R_l^-1 for every l, shape L x N_S x N_S."""
    a = steering_ula(model.n_s, theta2, model.delta, centred=True)
    c = np.asarray(_sm_coefficient(q, model))
    eye = np.eye(model.n_s) / model.sigma2_s
    return eye[None, :, :] - c[:, None, None] * np.outer(a, a.conj())[None, :, :]


# ---------------------------------------------------------------------------
# Fisher information
# ---------------------------------------------------------------------------


def fim(
    theta1: float,
    theta2: float,
    w: Waveform,
    model: SensingModel,
    with_dris: bool = True,
) -> FloatArray:
    """
    F_ij = sum_l 2 Re{du_l^H/dtheta_i R_l^-1 du_l/dtheta_j}
         + sum_l tr{R_l^-1 dR_l/dtheta_i R_l^-1 dR_l/dtheta_j}.

    Without the DRIS the covariance is sigma_s^2 I and the trace term vanishes.
    """
    if not model.sigma2_s > 0.0:
        raise NumericalError("sensing covariance is singular", {"sigma2_s": model.sigma2_s})
    if w.n_b != model.n_b:
        raise DomainError(f"waveform has {w.n_b} antennas, model expects {model.n_b}")
    x = w.x
    du1, du2 = mean_derivatives(theta1, theta2, x, model)
    derivs = (du1, du2)
    out = np.zeros((2, 2))

    if not with_dris:
        for i in range(2):
            for j in range(2):
                out[i, j] = 2.0 * np.real(np.vdot(derivs[i], derivs[j])) / model.sigma2_s
        return out

    q = dris_power(x, model)
    r_inv = inverse_stack(theta2, q, model)
    for i in range(2):
        for j in range(2):
            r_dj = np.einsum("lmn,nl->ml", r_inv, derivs[j])
            out[i, j] = 2.0 * np.real(np.vdot(derivs[i], r_dj))

    d_outer = outer_derivative(model.n_s, theta2, model.delta)
    p = q[:, None, None] * np.einsum("lmn,nk->lmk", r_inv, d_outer)
    out[1, 1] += float(np.real(np.einsum("lij,lji->", p, p)))
    return out


def crlb(fisher: FloatArray) -> tuple[float, float]:
    """([F^-1]_11, [F^-1]_22) = (F22 / det F, F11 / det F)."""
    f = np.asarray(fisher, dtype=float)
    det = f[0, 0] * f[1, 1] - f[0, 1] * f[1, 0]
    if not (np.all(np.isfinite(f)) and det > 0.0 and f[0, 0] > 0.0 and f[1, 1] > 0.0):
        raise UnidentifiableError(f"FIM is singular or indefinite (det={det!r})")
    return float(f[1, 1] / det), float(f[0, 0] / det)


def sensing_report(
    theta1: float, theta2: float, w: Waveform, model: SensingModel, with_dris: bool
) -> SensingReport:
    f = fim(theta1, theta2, w, model if with_dris else model.without_dris(), with_dris)
    c1, c2 = crlb(f)
    return SensingReport(fim=f, crlb_theta1=c1, crlb_theta2=c2, with_dris=with_dris)


# ---------------------------------------------------------------------------
# Observations
# ---------------------------------------------------------------------------


def sensing_observation(
    channels: ChannelSet,
    w: Waveform,
    model: SensingModel,
    profile: DrisProfile,
    rng: np.random.Generator,
) -> ComplexArray:
    """
    Columns y_l = chi h_d2 ((h_d1 + h_D(t_l))^T x_l) + n_l, one fresh DRIS
    state per symbol. Shape N_S x L.
    """
    x = w.x
    frame_len = x.shape[1]
    if channels.dris_enabled:
        states = draw_reflection_states(profile, channels.n_d, frame_len, rng)
        paths = channels.h_d1_s[None, :] + dris_sensing_paths(channels, states)
    else:
        paths = np.broadcast_to(channels.h_d1_s, (frame_len, channels.n_b))
    gains = np.sum(paths * x.T, axis=1)
    noise = math.sqrt(model.sigma2_s) * complex_gaussian(rng, (channels.n_s, frame_len))
    return model.chi * channels.h_d2_s[:, None] * gains[None, :] + noise


def to_angles(theta: Sequence[float]) -> tuple[float, float]:
    if len(theta) != 2:
        raise DomainError(f"expected (theta1, theta2), got {theta!r}")
    return float(theta[0]), float(theta[1])
