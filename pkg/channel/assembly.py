"""
Channel assembly — one coherence-interval realization of every link.

Storage convention: user channels are column-per-user (h_d_c is N_B x K_c,
h_i_c is N_D x K_c). The K_c x N_B matrices the BS precodes against are
the Hermitian transposes of the composites, exposed as ``h_pt``/``h_dt``.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

from channel.dris import ReflectionState, draw_reflection_state
from channel.geometry import (
    distance,
    near_field_los,
    path_gain,
    steering_ula,
    ula_angle,
    upa_angles,
    upa_response,
)
from schemas.errors import DomainError
from schemas.scenario import Geometry, ScenarioConfig

logger = logging.getLogger(__name__)

ComplexArray = NDArray[np.complex128]


@dataclass(frozen=True)
class LargeScaleGains:
    """Linear path gains of every link (all strictly positive)."""

    l_g: float
    l_i_c: tuple[float, ...]
    l_d_c: tuple[float, ...]
    l_d1_s: float
    l_d2_s: float
    l_i_s: float

    def __post_init__(self) -> None:
        values = (self.l_g, self.l_d1_s, self.l_d2_s, self.l_i_s, *self.l_i_c, *self.l_d_c)
        if any(not v > 0.0 for v in values):
            raise DomainError("large-scale gains must be strictly positive")

    @property
    def l_cas_s(self) -> float:
        """BS -> DRIS -> target cascaded gain."""
        return self.l_g * self.l_i_s

    @property
    def l_cas_c(self) -> NDArray[np.float64]:
        """BS -> DRIS -> user k cascaded gains."""
        return self.l_g * np.asarray(self.l_i_c)


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """All channels of one realization plus the PT/DT reflection states."""

    g: ComplexArray
    h_d_c: ComplexArray
    h_i_c: ComplexArray
    h_d1_s: ComplexArray
    h_d2_s: ComplexArray
    h_i_s: ComplexArray
    large_scale: LargeScaleGains
    phi_pt: ReflectionState
    phi_dt: ReflectionState
    theta1: float
    theta2: float
    delta: float = 0.5
    dris_enabled: bool = True
    users: NDArray[np.float64] = field(default_factory=lambda: np.zeros((0, 3)))
    target: NDArray[np.float64] = field(default_factory=lambda: np.zeros(3))

    @property
    def n_b(self) -> int:
        return int(self.g.shape[0])

    @property
    def n_d(self) -> int:
        return int(self.g.shape[1]) if self.dris_enabled else 0

    @property
    def n_s(self) -> int:
        return int(self.h_d2_s.shape[0])

    @property
    def k_c(self) -> int:
        return int(self.h_d_c.shape[1])

    def composite(self, state: ReflectionState) -> ComplexArray:
        """H_d + G diag(phi) H_I, column-per-user (N_B x K_c)."""
        if not self.dris_enabled:
            return self.h_d_c
        return self.h_d_c + self.g @ (state.coeffs[:, None] * self.h_i_c)

    @property
    def h_pt(self) -> ComplexArray:
        return self.composite(self.phi_pt).conj().T

    @property
    def h_dt(self) -> ComplexArray:
        return self.composite(self.phi_dt).conj().T

    @property
    def h_aca(self) -> ComplexArray:
        """H_DT - H_PT, row-per-user."""
        return self.h_dt - self.h_pt

    def aca_for(self, state_dt: ReflectionState) -> ComplexArray:
        """ACA matrix for an alternative DT state, holding the PT state fixed."""
        if not self.dris_enabled:
            return np.zeros((self.k_c, self.n_b), dtype=complex)
        diff = state_dt.coeffs - self.phi_pt.coeffs
        return (self.g @ (diff[:, None] * self.h_i_c)).conj().T

    def with_states(
        self,
        phi_pt: ReflectionState | None = None,
        phi_dt: ReflectionState | None = None,
    ) -> ChannelSet:
        return replace(
            self,
            phi_pt=phi_pt if phi_pt is not None else self.phi_pt,
            phi_dt=phi_dt if phi_dt is not None else self.phi_dt,
        )

    def without_dris(self) -> ChannelSet:
        """Same realization with the DRIS absent (H_PT = H_DT = H_d, h_D^s = 0)."""
        return replace(self, dris_enabled=False)


# ---------------------------------------------------------------------------
# Random placement
# ---------------------------------------------------------------------------


def complex_gaussian(rng: np.random.Generator, shape: tuple[int, ...]) -> ComplexArray:
    """i.i.d. CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def draw_user_positions(
    geometry: Geometry, k_c: int, rng: np.random.Generator
) -> NDArray[np.float64]:
    """Users uniform over the disc around ``user_center`` in its horizontal plane."""
    radius = geometry.user_radius * np.sqrt(rng.uniform(0.0, 1.0, k_c))
    angle = rng.uniform(0.0, 2.0 * np.pi, k_c)
    center = np.asarray(geometry.user_center, dtype=float)
    offsets = np.stack([radius * np.cos(angle), radius * np.sin(angle), np.zeros(k_c)], axis=1)
    return center + offsets


def draw_target_position(geometry: Geometry, rng: np.random.Generator) -> NDArray[np.float64]:
    """Target at fixed range, bearing uniform in the band, on either side of the x-axis."""
    bearing = rng.uniform(geometry.target_bearing_min, geometry.target_bearing_max)
    side = 1.0 if rng.uniform() < 0.5 else -1.0
    r = geometry.target_range
    return np.array(
        [r * math.cos(bearing), side * r * math.sin(bearing), geometry.target_height]
    )


def large_scale_gains(
    geometry: Geometry, users: NDArray[np.float64], target: NDArray[np.float64]
) -> LargeScaleGains:
    # Direct BS -> user links are NLoS; every other link is LoS.
    return LargeScaleGains(
        l_g=path_gain(distance(geometry.bs, geometry.dris), los=True),
        l_i_c=tuple(path_gain(distance(geometry.dris, u), los=True) for u in users),
        l_d_c=tuple(path_gain(distance(geometry.bs, u), los=False) for u in users),
        l_d1_s=path_gain(distance(geometry.bs, target), los=True),
        l_d2_s=path_gain(distance(target, geometry.receiver), los=True),
        l_i_s=path_gain(distance(geometry.dris, target), los=True),
    )


@functools.lru_cache(maxsize=16)
def bs_dris_los(
    bs: tuple[float, float, float],
    dris: tuple[float, float, float],
    n_b: int,
    n_d_h: int,
    n_d_v: int,
    wavelength: float,
) -> ComplexArray:
    """Read-only near-field LoS part of G, cached per deployment."""
    los = near_field_los(bs, dris, n_b, n_d_h, n_d_v, wavelength)
    los.setflags(write=False)
    return los


def _readonly(arr: ComplexArray) -> ComplexArray:
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------


def assemble_channels(config: ScenarioConfig, rng: np.random.Generator) -> ChannelSet:
    """Draw users, target, small-scale fading and PT/DT reflection states."""
    geo = config.geometry
    users = draw_user_positions(geo, config.k_c, rng)
    target = draw_target_position(geo, rng)
    gains = large_scale_gains(geo, users, target)

    eps = config.rician_factor
    los = bs_dris_los(
        geo.bs, geo.dris, config.n_b, config.n_d_h, config.n_d_v, config.wavelength
    )
    nlos = complex_gaussian(rng, (config.n_b, config.n_d))
    g = math.sqrt(gains.l_g) * (
        math.sqrt(eps / (1.0 + eps)) * los + math.sqrt(1.0 / (1.0 + eps)) * nlos
    )

    h_d_c = complex_gaussian(rng, (config.n_b, config.k_c)) * np.sqrt(gains.l_d_c)[None, :]
    h_i_c = complex_gaussian(rng, (config.n_d, config.k_c)) * np.sqrt(gains.l_i_c)[None, :]

    theta1 = ula_angle(geo.bs, target)
    theta2 = ula_angle(geo.receiver, target)
    theta_h, theta_v = upa_angles(geo.dris, target)
    delta = config.spacing_ratio
    a_b = steering_ula(config.n_b, theta1, delta, centred=True)
    a_s = steering_ula(config.n_s, theta2, delta, centred=True)

    phi_pt = draw_reflection_state(config.dris, config.n_d, rng)
    phi_dt = draw_reflection_state(config.dris, config.n_d, rng)

    logger.debug(
        "Channels drawn: theta1=%.4f rad, theta2=%.4f rad, L_G=%.3e",
        theta1,
        theta2,
        gains.l_g,
    )
    return ChannelSet(
        g=_readonly(g),
        h_d_c=_readonly(h_d_c),
        h_i_c=_readonly(h_i_c),
        h_d1_s=_readonly(math.sqrt(gains.l_d1_s) * a_b),
        h_d2_s=_readonly(math.sqrt(gains.l_d2_s) * a_s),
        h_i_s=_readonly(upa_response(config.n_d_h, config.n_d_v, theta_h, theta_v, delta)),
        large_scale=gains,
        phi_pt=phi_pt,
        phi_dt=phi_dt,
        theta1=theta1,
        theta2=theta2,
        delta=delta,
        users=users,
        target=target,
    )


def dris_sensing_path(
    g: ComplexArray,
    h_i_s: ComplexArray,
    state: ReflectionState,
    large_scale: LargeScaleGains,
) -> ComplexArray:
    """h_D^s = sqrt(L_I^s) G diag(phi) h_I^s; G already carries sqrt(L_G)."""
    if g.ndim != 2 or h_i_s.shape != (g.shape[1],) or state.coeffs.shape != (g.shape[1],):
        raise DomainError(
            f"dimension mismatch: G {g.shape}, h_I^s {h_i_s.shape}, state {state.coeffs.shape}"
        )
    return math.sqrt(large_scale.l_i_s) * (g @ (state.coeffs * h_i_s))


def dris_sensing_paths(channels: ChannelSet, states: ComplexArray) -> ComplexArray:
    """Row l is h_D^s for the state in row l of ``states`` (shape L x N_B)."""
    if not channels.dris_enabled:
        return np.zeros((states.shape[0], channels.n_b), dtype=complex)
    weighted = states * channels.h_i_s[None, :]
    return math.sqrt(channels.large_scale.l_i_s) * (weighted @ channels.g.T)
