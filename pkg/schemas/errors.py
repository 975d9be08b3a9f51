"""
Exception hierarchy — every failure the library raises on purpose.

The CLI maps these to exit codes; library callers can catch
DiscoIsacError to handle all of them at once.
"""

from __future__ import annotations

from typing import Any


class DiscoIsacError(Exception):
    """Base class for all deliberate failures."""


class DomainError(DiscoIsacError, ValueError):
    """Argument outside the domain of an operation (bad distance, shape mismatch, ...)."""


class ConfigError(DiscoIsacError):
    """Invalid scenario file or scenario values, optionally anchored to a file line."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None) -> None:
        self.message = message
        self.path = path
        self.line = line
        super().__init__(self.location_prefix + message)

    @property
    def location_prefix(self) -> str:
        if self.path is None:
            return ""
        if self.line is None:
            return f"{self.path}: "
        return f"{self.path}:{self.line}: "


class InfeasibleConstraintError(DiscoIsacError):
    """The waveform covariance constraint cannot be met (frame shorter than the array)."""


class NumericalError(DiscoIsacError):
    """A numerical routine failed to converge or hit a singular quantity."""

    def __init__(self, message: str, diagnostics: dict[str, Any] | None = None) -> None:
        self.diagnostics = diagnostics or {}
        detail = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
        super().__init__(f"{message} ({detail})" if detail else message)


class UnidentifiableError(DiscoIsacError):
    """The Fisher information matrix is singular or indefinite."""
