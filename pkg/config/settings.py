"""
Centralized runtime configuration for disco-isac.

Numerical tolerances, iteration limits and worker counts are loaded from
environment variables with sensible defaults. Physical scenarios are not
configured here; they come from TOML scenario files (see config.loader).
"""

from __future__ import annotations

from pydantic import Field
from pydantic_settings import BaseSettings


class SolverSettings(BaseSettings):
    """Secular-equation root search for the ISAC waveform."""

    max_iterations: int = Field(default=200, alias="DISCO_ISAC_SOLVER_MAX_ITER")
    power_rtol: float = Field(
        default=1e-12,
        description="Relative tolerance on trace(XX^H) = P0*L at the root",
    )
    hard_case_rtol: float = Field(
        default=1e-12,
        description="Relative mass on the minimal eigenspace treated as zero",
    )


class EstimatorSettings(BaseSettings):
    """Gradient-ascent MLE of the target angles."""

    grid_spacing_deg: float = Field(default=2.0, alias="DISCO_ISAC_GRID_SPACING_DEG")
    sigma_thresh: float = Field(
        default=1e-10,
        description="Stop when the squared angle update falls below this (rad^2)",
    )
    max_iterations: int = Field(default=500)
    max_halvings: int = Field(default=60)


class HarnessSettings(BaseSettings):
    """Monte Carlo sweep execution."""

    threads: int | None = Field(default=None, alias="DISCO_ISAC_THREADS")
    default_trials: int = Field(default=200)
    dt_redraws: int = Field(
        default=16,
        description="DT reflection-state redraws per trial when estimating SINR",
    )


class ValidationSettings(BaseSettings):
    """Thresholds for the statistical validation report."""

    samples: int = Field(default=10_000, alias="DISCO_ISAC_VALIDATION_SAMPLES")
    variance_rtol: float = Field(default=0.05)
    sigma_band: float = Field(default=3.0)
    moment_atol: float = Field(
        default=1e-12,
        description="Allowed gap between the closed-form moments and pair enumeration",
    )
    chunk_size: int = Field(
        default=512,
        description="Samples drawn per vectorized block to bound memory",
    )


class Settings(BaseSettings):
    """Root settings container aggregating all sub-configurations."""

    solver: SolverSettings = Field(default_factory=SolverSettings)
    estimator: EstimatorSettings = Field(default_factory=EstimatorSettings)
    harness: HarnessSettings = Field(default_factory=HarnessSettings)
    validation: ValidationSettings = Field(default_factory=ValidationSettings)

    log_level: str = Field(default="INFO", alias="DISCO_ISAC_LOG_LEVEL")


# Module-level singleton
settings = Settings()
