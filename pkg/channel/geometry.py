"""
Array geometry — path loss, steering vectors, UPA response, near-field LoS.

Conventions:
  * ULAs lie along +x starting at their reference (first) antenna.
  * The DRIS is a vertical x-z plane facing +y that grows away from the BS:
    element r sits (r // n_v) spacings along -x and (r % n_v) spacings
    along +z from its reference element, which is the ordering of the
    Kronecker product a_h(theta_h) (x) a_v(theta_v).
  * Angles are measured from array broadside: sin(theta) is the direction
    cosine along the array axis.
  * ULA responses are phase-referenced at the first antenna by default;
    ``centred=True`` moves the reference to the array centre, so that
    a^H da/dtheta = 0. The bistatic sensing links use the centred form.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray

from schemas.errors import DomainError

ComplexArray = NDArray[np.complex128]
FloatArray = NDArray[np.float64]
PointLike = FloatArray | tuple[float, ...]

X_AXIS = np.array([1.0, 0.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])
DRIS_H_AXIS = -X_AXIS
DRIS_V_AXIS = Z_AXIS


# ---------------------------------------------------------------------------
# Large-scale fading
# ---------------------------------------------------------------------------


def path_loss_db(distance_m: float, los: bool) -> float:
    """Path loss in dB: 35.6 + 22 log10(d) for LoS, 32.6 + 36.7 log10(d) otherwise."""
    if not distance_m > 0.0 or not math.isfinite(distance_m):
        raise DomainError(f"distance must be positive and finite, got {distance_m!r}")
    if los:
        return 35.6 + 22.0 * math.log10(distance_m)
    return 32.6 + 36.7 * math.log10(distance_m)


def path_gain(distance_m: float, los: bool) -> float:
    """Linear-scale gain 10^(-PL/10)."""
    return 10.0 ** (-path_loss_db(distance_m, los) / 10.0)


# ---------------------------------------------------------------------------
# Array responses
# ---------------------------------------------------------------------------


def _element_index(n: int, centred: bool) -> FloatArray:
    m = np.arange(n, dtype=float)
    return m - (n - 1) / 2.0 if centred else m


def steering_ula(
    n: int, theta: float, delta: float = 0.5, centred: bool = False
) -> ComplexArray:
    if n < 1:
        raise DomainError(f"array size must be >= 1, got {n}")
    m = _element_index(n, centred)
    return np.exp(1j * 2.0 * np.pi * delta * m * np.sin(theta))


def steering_derivative(
    n: int, theta: float, delta: float = 0.5, centred: bool = False
) -> ComplexArray:
    """d/dtheta of steering_ula: j 2 pi delta cos(theta) m e^{j 2 pi delta m sin(theta)}."""
    m = _element_index(n, centred)
    return 1j * 2.0 * np.pi * delta * np.cos(theta) * m * steering_ula(n, theta, delta, centred)


def upa_response(
    n_h: int, n_v: int, theta_h: float, theta_v: float, delta: float = 0.5
) -> ComplexArray:
    """DRIS plane response, a_h(theta_h) kron a_v(theta_v)."""
    return np.kron(steering_ula(n_h, theta_h, delta), steering_ula(n_v, theta_v, delta))


# ---------------------------------------------------------------------------
# Element positions and angles
# ---------------------------------------------------------------------------


def ula_positions(origin: tuple[float, float, float], n: int, spacing: float) -> FloatArray:
    return np.asarray(origin, dtype=float) + np.arange(n)[:, None] * spacing * X_AXIS


def upa_positions(
    origin: tuple[float, float, float], n_h: int, n_v: int, spacing: float
) -> FloatArray:
    r = np.arange(n_h * n_v)
    offsets = (r // n_v)[:, None] * DRIS_H_AXIS + (r % n_v)[:, None] * DRIS_V_AXIS
    return np.asarray(origin, dtype=float) + spacing * offsets


def unit_direction(start: PointLike, end: PointLike) -> FloatArray:
    vec = np.asarray(end, dtype=float) - np.asarray(start, dtype=float)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise DomainError("direction between coincident points is undefined")
    return vec / norm


def ula_angle(array_origin: tuple[float, ...], point: PointLike) -> float:
    """Broadside angle of ``point`` seen from an x-axis ULA."""
    u = unit_direction(array_origin, point)
    return float(np.arcsin(np.clip(u[0], -1.0, 1.0)))


def upa_angles(
    surface_origin: tuple[float, ...], point: PointLike
) -> tuple[float, float]:
    """(theta_h, theta_v) of ``point`` seen from the x-z DRIS plane."""
    u = unit_direction(surface_origin, point)
    return (
        float(np.arcsin(np.clip(u @ DRIS_H_AXIS, -1.0, 1.0))),
        float(np.arcsin(np.clip(u @ DRIS_V_AXIS, -1.0, 1.0))),
    )


def distance(a: PointLike, b: PointLike) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


# ---------------------------------------------------------------------------
# Near-field LoS between the BS array and the DRIS
# ---------------------------------------------------------------------------


def near_field_los(
    bs: tuple[float, float, float],
    dris: tuple[float, float, float],
    n_b: int,
    n_d_h: int,
    n_d_v: int,
    wavelength: float,
) -> ComplexArray:
    """
    Exact spherical-wave LoS matrix between the BS ULA and the DRIS.

    Entry (n, r) is exp(-j 2pi/lambda (D_n^r - D_n)), with D_n^r the distance
    from antenna n to element r and D_n the distance from antenna n to the
    DRIS reference element. Both arrays use half-wavelength spacing.
    """
    if wavelength <= 0.0:
        raise DomainError(f"wavelength must be positive, got {wavelength!r}")
    spacing = wavelength / 2.0
    antennas = ula_positions(bs, n_b, spacing)
    elements = upa_positions(dris, n_d_h, n_d_v, spacing)

    d_nr = np.linalg.norm(antennas[:, None, :] - elements[None, :, :], axis=-1)
    if np.min(d_nr) == 0.0:
        raise DomainError("BS antenna and DRIS element positions coincide")
    d_n = np.linalg.norm(antennas - np.asarray(dris, dtype=float), axis=-1)
    return np.exp(-1j * 2.0 * np.pi / wavelength * (d_nr - d_n[:, None]))
