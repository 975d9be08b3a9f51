"""
Validation schemas — statistical and oracle check rows.
"""

from __future__ import annotations

from enum import StrEnum

from pydantic import BaseModel, Field


class CheckStatus(StrEnum):
    PASS = "pass"
    FAIL = "fail"
    WARN = "warn"


class CheckResult(BaseModel):
    """A single observed-vs-expected comparison."""

    name: str
    observed: float
    expected: float
    tolerance: float = Field(description="Allowed deviation; meaning depends on the check")
    status: CheckStatus
    detail: str = ""


class ValidationRecord(BaseModel):
    """Ordered collection of check rows for one scenario."""

    checks: list[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status != CheckStatus.FAIL for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if c.status == CheckStatus.FAIL]

    def extend(self, other: ValidationRecord) -> None:
        self.checks.extend(other.checks)


def tolerance_check(
    name: str,
    observed: float,
    expected: float,
    tolerance: float,
    relative: bool = False,
    detail: str = "",
) -> CheckResult:
    """Pass when |observed - expected| <= tolerance (times |expected| if relative)."""
    bound = tolerance * abs(expected) if relative else tolerance
    status = CheckStatus.PASS if abs(observed - expected) <= bound else CheckStatus.FAIL
    return CheckResult(
        name=name,
        observed=observed,
        expected=expected,
        tolerance=tolerance,
        status=status,
        detail=detail,
    )
