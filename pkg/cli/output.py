"""
Result files — sweep CSV, validation CSV and the JSON run manifest.

CSVs are UTF-8 with LF line endings and 17 significant digits, so a replayed
sweep reproduces the file byte for byte.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path

import pandas as pd

from schemas.sweep import RunManifest, SweepRecord
from schemas.validation import ValidationRecord

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["axis", "benchmark", "metric", "mean", "stderr", "trials"]
VALIDATION_COLUMNS = ["name", "observed", "expected", "tolerance", "status", "detail"]
CRLB_COLUMNS = ["benchmark", "fim_11", "fim_12", "fim_21", "fim_22", "crlb_aod", "crlb_aoa"]

CSV_OPTIONS = {"index": False, "float_format": "%.17g", "lineterminator": "\n"}


def sweep_frame(records: Sequence[SweepRecord]) -> pd.DataFrame:
    rows = [r.model_dump(mode="json") for r in records]
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def validation_frame(record: ValidationRecord) -> pd.DataFrame:
    rows = [c.model_dump(mode="json") for c in record.checks]
    return pd.DataFrame(rows, columns=VALIDATION_COLUMNS)


def frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(**CSV_OPTIONS)


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(frame_to_csv(frame))
    logger.info("Wrote %d rows to %s", len(frame), path)
    return path


def output_paths(out: str | Path) -> tuple[Path, Path]:
    """``<out>.csv`` and ``<out>.manifest``."""
    base = str(out)
    return Path(f"{base}.csv"), Path(f"{base}.manifest")


def write_manifest(manifest: RunManifest, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("Wrote manifest %s", path)
    return path


def read_manifest(path: str | Path) -> RunManifest:
    return RunManifest.model_validate_json(Path(path).read_text(encoding="utf-8"))
