# disco-isac: Schemas Package
from schemas.errors import (
    ConfigError,
    DiscoIsacError,
    DomainError,
    InfeasibleConstraintError,
    NumericalError,
    UnidentifiableError,
)
from schemas.scenario import DrisProfile, Geometry, ScenarioConfig, reference_scenario
from schemas.sweep import Benchmark, Metric, RunManifest, SweepAxis, SweepRecord, SweepSpec
from schemas.validation import CheckResult, CheckStatus, ValidationRecord

__all__ = [
    "ConfigError",
    "DiscoIsacError",
    "DomainError",
    "InfeasibleConstraintError",
    "NumericalError",
    "UnidentifiableError",
    "DrisProfile",
    "Geometry",
    "ScenarioConfig",
    "reference_scenario",
    "Benchmark",
    "Metric",
    "RunManifest",
    "SweepAxis",
    "SweepRecord",
    "SweepSpec",
    "CheckResult",
    "CheckStatus",
    "ValidationRecord",
]
