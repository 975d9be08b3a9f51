"""
Scenario schemas — physical parameters of one bistatic ISAC deployment.

All quantities are SI (watts, meters, radians). Unit conversion from the
scenario file's dBm/degree fields happens in config.loader.
"""

from __future__ import annotations

import math
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Position = tuple[float, float, float]


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


class DrisProfile(BaseModel):
    """Discrete phase/amplitude alphabet the disco RIS draws from."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    bits: int = Field(ge=0, description="Phase quantization bits b; the alphabet has 2^b entries")
    phases: tuple[float, ...] = Field(description="Phase set, radians, wrapped to [-pi, pi]")
    amplitudes: tuple[float, ...] = Field(
        description="Amplitude per phase entry (lockstep with phases)",
    )
    probs: tuple[float, ...] = Field(description="Selection probability per entry")

    @field_validator("phases")
    @classmethod
    def _wrap_phases(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        return tuple(math.remainder(p, 2.0 * math.pi) for p in v)

    @field_validator("amplitudes")
    @classmethod
    def _check_amplitudes(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if any(not 0.0 <= a <= 1.0 for a in v):
            raise ValueError("amplitudes must lie in [0, 1]")
        return v

    @field_validator("probs")
    @classmethod
    def _check_probs(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if any(p < 0.0 for p in v):
            raise ValueError("probabilities must be non-negative")
        if abs(math.fsum(v) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {math.fsum(v)!r}, expected 1")
        return v

    @model_validator(mode="after")
    def _check_alphabet(self) -> DrisProfile:
        size = 2**self.bits
        if not len(self.phases) == len(self.amplitudes) == len(self.probs) == size:
            raise ValueError(
                f"phases/amplitudes/probs must each have 2^bits = {size} entries, got "
                f"{len(self.phases)}/{len(self.amplitudes)}/{len(self.probs)}"
            )
        mean = self.mean_coefficient
        if abs(mean) > 1e-9:
            raise ValueError(
                "reflection coefficient must be zero-mean, "
                f"got |E[beta e^(j phi)]| = {abs(mean):.3e}"
            )
        return self

    @property
    def mean_coefficient(self) -> complex:
        return sum(
            p * a * complex(math.cos(ph), math.sin(ph))
            for p, a, ph in zip(self.probs, self.amplitudes, self.phases, strict=True)
        )

    @property
    def size(self) -> int:
        return len(self.phases)


class Geometry(BaseModel):
    """Node positions and random-placement rules (meters, radians)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    bs: Position = Field(description="First antenna of the ISAC BS ULA")
    dris: Position = Field(description="First (reference) element of the DRIS")
    receiver: Position = Field(description="First antenna of the sensing receiver ULA")
    user_center: Position
    user_radius: float = Field(gt=0.0)
    target_range: float = Field(gt=0.0, description="Target distance from the origin")
    target_bearing_min: float = Field(description="Bearing lower bound from the x-axis, radians")
    target_bearing_max: float
    target_height: float = Field(default=0.0)

    @model_validator(mode="after")
    def _check_bearing(self) -> Geometry:
        if self.target_bearing_max < self.target_bearing_min:
            raise ValueError("target_bearing_max must not be below target_bearing_min")
        return self


class ScenarioConfig(BaseModel):
    """Full physical scenario for one simulation run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_b: int = Field(ge=1, description="ISAC BS antennas")
    n_s: int = Field(ge=1, description="Sensing receiver antennas")
    n_d_h: int = Field(ge=1, description="DRIS elements along x")
    n_d_v: int = Field(ge=1, description="DRIS elements along z")
    k_c: int = Field(ge=1, description="Single-antenna users")
    frame_len: int = Field(ge=1, description="Symbols per frame L")
    kappa: float = Field(ge=0.0, le=1.0, description="Sensing/communication trade-off")
    p0: float = Field(gt=0.0, description="Total transmit power, watts")
    wavelength: float = Field(gt=0.0)
    spacing_ratio: float = Field(default=0.5, gt=0.0, description="Element spacing over wavelength")
    rician_factor: float = Field(ge=0.0, description="Rician factor of G, linear")
    chi: float = Field(ge=0.0, le=1.0, description="Target reflection cross-section")
    sigma2_c: float = Field(gt=0.0, description="Communication noise variance, watts")
    sigma2_s: float = Field(gt=0.0, description="Sensing noise variance, watts")
    symbol_amplitude: float | None = Field(
        default=None,
        gt=0.0,
        description="Target symbol amplitude; derived from the direct-link gain when unset",
    )
    geometry: Geometry
    dris: DrisProfile
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_frame(self) -> ScenarioConfig:
        if self.frame_len < self.n_b:
            raise ValueError(
                f"frame_len ({self.frame_len}) must be >= n_b ({self.n_b}) "
                "for the waveform covariance constraint"
            )
        return self

    @property
    def n_d(self) -> int:
        return self.n_d_h * self.n_d_v

    @property
    def element_spacing(self) -> float:
        return self.spacing_ratio * self.wavelength

    def evolve(self, **changes: Any) -> ScenarioConfig:
        """Return a re-validated copy with the given fields replaced."""
        data = self.model_dump()
        for key, value in changes.items():
            data[key] = value.model_dump() if isinstance(value, BaseModel) else value
        return type(self).model_validate(data)


# ---------------------------------------------------------------------------
# Reference deployment
# ---------------------------------------------------------------------------

REFERENCE_NOISE_DBM = -170.0 + 10.0 * math.log10(180e3)


def reference_profile() -> DrisProfile:
    """1-bit profile with phases {2pi/5, 7pi/5}, unit amplitudes, equal probabilities."""
    return DrisProfile(
        bits=1,
        phases=(2.0 * math.pi / 5.0, 7.0 * math.pi / 5.0),
        amplitudes=(1.0, 1.0),
        probs=(0.5, 0.5),
    )


def reference_geometry(dris_distance: float = 1.0) -> Geometry:
    return Geometry(
        bs=(0.0, 0.0, 3.0),
        dris=(-dris_distance, 0.0, 2.5),
        receiver=(0.0, 60.0, 0.0),
        user_center=(0.0, 180.0, 0.0),
        user_radius=20.0,
        target_range=20.0,
        target_bearing_min=math.pi / 6.0,
        target_bearing_max=math.pi / 3.0,
    )


def reference_scenario(**overrides: Any) -> ScenarioConfig:
    """Experimental deployment: 8-antenna BS, 64x64 DRIS, four users, L = 80."""
    fields: dict[str, Any] = {
        "n_b": 8,
        "n_s": 8,
        "n_d_h": 64,
        "n_d_v": 64,
        "k_c": 4,
        "frame_len": 80,
        "kappa": 0.2,
        "p0": dbm_to_watts(11.0),
        "wavelength": 0.1,
        "spacing_ratio": 0.5,
        "rician_factor": db_to_linear(3.0),
        "chi": 0.9,
        "sigma2_c": dbm_to_watts(REFERENCE_NOISE_DBM),
        "sigma2_s": dbm_to_watts(REFERENCE_NOISE_DBM),
        "geometry": reference_geometry(),
        "dris": reference_profile(),
        "seed": 0,
    }
    fields.update(overrides)
    return ScenarioConfig(**fields)
