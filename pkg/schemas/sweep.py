"""
Sweep schemas — what to sweep, what comes back, and the run manifest.
"""

from __future__ import annotations

from datetime import datetime, timezone
from enum import StrEnum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class SweepAxis(StrEnum):
    """Scenario parameter varied along a sweep."""

    POWER_DBM = "power_dbm"
    N_D = "n_d"
    DRIS_DISTANCE_M = "dris_distance_m"


class Metric(StrEnum):
    """Per-trial quantities a sweep can report."""

    SUM_RATE = "sum_rate"
    SINR_BOUND = "sinr_bound"
    MSE_AOD = "mse_aod"
    MSE_AOA = "mse_aoa"
    CRLB_AOD = "crlb_aod"
    CRLB_AOA = "crlb_aoa"

    @property
    def is_sensing(self) -> bool:
        return self in _SENSING_METRICS

    @property
    def is_angle_error(self) -> bool:
        return self in (Metric.MSE_AOD, Metric.MSE_AOA)


_SENSING_METRICS = frozenset(
    {Metric.MSE_AOD, Metric.MSE_AOA, Metric.CRLB_AOD, Metric.CRLB_AOA}
)


class Benchmark(StrEnum):
    """Waveform choices and DRIS variants selectable in a sweep."""

    COMM_WAVEFORM = "comm_waveform"
    ISAC_WAVEFORM = "isac_waveform"
    SENSING_WAVEFORM = "sensing_waveform"
    WITH_DRIS = "with_dris"
    WITHOUT_DRIS = "without_dris"


WAVEFORM_BENCHMARKS = (
    Benchmark.COMM_WAVEFORM,
    Benchmark.ISAC_WAVEFORM,
    Benchmark.SENSING_WAVEFORM,
)
VARIANT_BENCHMARKS = (Benchmark.WITHOUT_DRIS, Benchmark.WITH_DRIS)


def benchmark_label(waveform: Benchmark, variant: Benchmark | None = None) -> str:
    """CSV label, e.g. ``isac_waveform/with_dris``."""
    return waveform.value if variant is None else f"{waveform.value}/{variant.value}"


class SweepSpec(BaseModel):
    """One sweep: an axis, its values, trials per point, metrics and benchmarks."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    axis: SweepAxis
    values: tuple[float, ...] = Field(min_length=1)
    trials: int = Field(ge=1)
    metrics: tuple[Metric, ...] = Field(min_length=1)
    benchmarks: tuple[Benchmark, ...] = Field(
        default=(Benchmark.COMM_WAVEFORM, Benchmark.ISAC_WAVEFORM, Benchmark.SENSING_WAVEFORM),
    )

    @field_validator("values")
    @classmethod
    def _strictly_monotone(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        steps = [b - a for a, b in zip(v, v[1:])]
        if steps and not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
            raise ValueError("axis values must be strictly monotone")
        return v

    @model_validator(mode="after")
    def _needs_waveform(self) -> SweepSpec:
        if not self.waveforms:
            raise ValueError("benchmarks must name at least one waveform")
        return self

    @property
    def waveforms(self) -> tuple[Benchmark, ...]:
        return tuple(b for b in WAVEFORM_BENCHMARKS if b in self.benchmarks)

    @property
    def variants(self) -> tuple[Benchmark, ...]:
        chosen = tuple(b for b in VARIANT_BENCHMARKS if b in self.benchmarks)
        return chosen or VARIANT_BENCHMARKS


class SweepRecord(BaseModel):
    """One aggregated row of a sweep result."""

    axis: float
    benchmark: str
    metric: Metric
    mean: float
    stderr: float = Field(ge=0.0, description="Sample standard deviation over sqrt(trials)")
    trials: int = Field(ge=1)


class PointError(BaseModel):
    """A sweep point that could not be evaluated."""

    axis: float
    error_type: str
    message: str


class RunManifest(BaseModel):
    """Everything needed to replay a sweep and reproduce its CSV."""

    tool_version: str
    config: dict[str, Any] = Field(description="Resolved ScenarioConfig snapshot")
    spec: SweepSpec
    seed: int
    started_at: str = Field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(),
    )
    wall_clock_s: float = 0.0
    point_runtimes_s: dict[str, float] = Field(
        default_factory=dict,
        description="Summed trial compute time per axis value",
    )
    dt_redraws: int | None = Field(
        default=None,
        ge=1,
        description="DT reflection-state redraws per SINR estimate",
    )
    point_errors: list[PointError] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)
