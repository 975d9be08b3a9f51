"""
Jinja2 report rendering for the CLI.

Provides pre-compiled templates and one render helper per report.
"""

from __future__ import annotations

from collections.abc import Sequence
from typing import Any

from jinja2 import Template

from config.templates import (
    CRLB_REPORT_TEMPLATE,
    SWEEP_SUMMARY_TEMPLATE,
    VALIDATION_TABLE_TEMPLATE,
)
from schemas.sweep import PointError, SweepRecord
from schemas.validation import CheckStatus, ValidationRecord

# Pre-compiled templates
crlb_report_template = Template(CRLB_REPORT_TEMPLATE)
validation_table_template = Template(VALIDATION_TABLE_TEMPLATE)
sweep_summary_template = Template(SWEEP_SUMMARY_TEMPLATE)


def render_crlb_report(
    seed: int,
    kappa: float,
    p0_dbm: float,
    theta_deg: tuple[float, float],
    reports: Sequence[dict[str, Any]],
) -> str:
    """``reports`` rows carry label, fim (2x2 nested list), crlb_aod and crlb_aoa in deg^2."""
    return crlb_report_template.render(
        seed=seed,
        kappa=kappa,
        p0_dbm=p0_dbm,
        theta1_deg=theta_deg[0],
        theta2_deg=theta_deg[1],
        reports=reports,
    )


def render_validation_table(record: ValidationRecord) -> str:
    return validation_table_template.render(
        checks=record.checks,
        passed=sum(c.status == CheckStatus.PASS for c in record.checks),
        warnings=sum(c.status == CheckStatus.WARN for c in record.checks),
        failures=len(record.failures),
    )


def render_sweep_summary(
    axis: str,
    points: int,
    trials: int,
    seed: int,
    records: Sequence[SweepRecord],
    errors: Sequence[PointError],
    csv_path: str,
    manifest_path: str,
    wall_clock_s: float,
) -> str:
    return sweep_summary_template.render(
        axis=axis,
        points=points,
        trials=trials,
        seed=seed,
        records=records,
        errors=errors,
        csv_path=csv_path,
        manifest_path=manifest_path,
        wall_clock_s=wall_clock_s,
    )
