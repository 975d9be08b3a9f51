"""
Scenario loader — TOML scenario files to validated ScenarioConfig.

Files carry boundary units (dBm, meters, degrees, dB) under fixed section
headers; each key is converted once here and mapped onto a ScenarioConfig
field. Every failure is raised as ConfigError anchored to the line of the
offending key (or its section header when the key is missing).
"""

from __future__ import annotations

import logging
import math
import re
import tomllib
from collections.abc import Callable
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from schemas.errors import ConfigError
from schemas.scenario import ScenarioConfig, db_to_linear, dbm_to_watts

logger = logging.getLogger(__name__)

Converter = Callable[[Any], Any]


def _same(value: Any) -> Any:
    return value


def _position(value: Any) -> tuple[float, float, float]:
    if not isinstance(value, list) or len(value) != 3:
        raise ValueError("expected a list of three coordinates in meters")
    return (float(value[0]), float(value[1]), float(value[2]))


def _floats(value: Any) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ValueError("expected a list of numbers")
    return tuple(float(v) for v in value)


def _degrees_list(value: Any) -> tuple[float, ...]:
    return tuple(math.radians(v) for v in _floats(value))


def _number(convert: Callable[[float], float]) -> Converter:
    def apply(value: Any) -> float:
        if isinstance(value, bool) or not isinstance(value, int | float):
            raise ValueError("expected a number")
        return convert(float(value))

    return apply


# section -> file key -> (ScenarioConfig field path, converter)
SCHEMA: dict[str, dict[str, tuple[tuple[str, ...], Converter]]] = {
    "arrays": {
        "n_b": (("n_b",), _same),
        "n_s": (("n_s",), _same),
        "n_d_h": (("n_d_h",), _same),
        "n_d_v": (("n_d_v",), _same),
        "spacing_ratio": (("spacing_ratio",), _same),
        "wavelength_m": (("wavelength",), _same),
    },
    "link": {
        "k_c": (("k_c",), _same),
        "frame_len": (("frame_len",), _same),
        "kappa": (("kappa",), _same),
        "p0_dbm": (("p0",), _number(dbm_to_watts)),
        "rician_factor_db": (("rician_factor",), _number(db_to_linear)),
        "chi": (("chi",), _same),
        "noise_dbm_c": (("sigma2_c",), _number(dbm_to_watts)),
        "noise_dbm_s": (("sigma2_s",), _number(dbm_to_watts)),
        "symbol_amplitude": (("symbol_amplitude",), _same),
    },
    "geometry": {
        "bs": (("geometry", "bs"), _position),
        "dris": (("geometry", "dris"), _position),
        "receiver": (("geometry", "receiver"), _position),
        "user_center": (("geometry", "user_center"), _position),
        "user_radius_m": (("geometry", "user_radius"), _same),
        "target_range_m": (("geometry", "target_range"), _same),
        "target_bearing_min_deg": (("geometry", "target_bearing_min"), _number(math.radians)),
        "target_bearing_max_deg": (("geometry", "target_bearing_max"), _number(math.radians)),
        "target_height_m": (("geometry", "target_height"), _same),
    },
    "dris": {
        "bits": (("dris", "bits"), _same),
        "phases_deg": (("dris", "phases"), _degrees_list),
        "amplitudes": (("dris", "amplitudes"), _floats),
        "probs": (("dris", "probs"), _floats),
    },
    "run": {
        "seed": (("seed",), _same),
    },
}

_FIELD_TO_KEY: dict[tuple[str, ...], tuple[str, str]] = {
    path: (section, key)
    for section, keys in SCHEMA.items()
    for key, (path, _) in keys.items()
}

# Nested models whose model-level validators report at the section header.
_MODEL_SECTIONS = frozenset({"geometry", "dris"})


# ---------------------------------------------------------------------------
# Line anchoring
# ---------------------------------------------------------------------------


class _LineIndex:
    """Locates section headers and ``key =`` lines in the raw file text."""

    _HEADER = re.compile(r"^\s*\[\s*([A-Za-z0-9_]+)\s*\]")
    _KEY = re.compile(r"^\s*([A-Za-z0-9_]+)\s*=")

    def __init__(self, text: str) -> None:
        self.sections: dict[str, int] = {}
        self.keys: dict[tuple[str, str], int] = {}
        current = ""
        for lineno, line in enumerate(text.splitlines(), start=1):
            if m := self._HEADER.match(line):
                current = m.group(1)
                self.sections.setdefault(current, lineno)
            elif m := self._KEY.match(line):
                self.keys.setdefault((current, m.group(1)), lineno)

    def line_of(self, section: str, key: str | None = None) -> int | None:
        if key is not None and (section, key) in self.keys:
            return self.keys[(section, key)]
        return self.sections.get(section)


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def _set_path(data: dict[str, Any], path: tuple[str, ...], value: Any) -> None:
    node = data
    for part in path[:-1]:
        node = node.setdefault(part, {})
    node[path[-1]] = value


def _translate(doc: dict[str, Any], index: _LineIndex, path: str) -> dict[str, Any]:
    data: dict[str, Any] = {}
    for section, body in doc.items():
        if section not in SCHEMA or not isinstance(body, dict):
            line = index.line_of(section) or index.line_of("", section)
            raise ConfigError(f"{section}: unknown section", path=path, line=line)
        for key, raw in body.items():
            if key not in SCHEMA[section]:
                raise ConfigError(
                    f"{key}: unknown key in [{section}]",
                    path=path,
                    line=index.line_of(section, key),
                )
            field_path, convert = SCHEMA[section][key]
            try:
                value = convert(raw)
            except (TypeError, ValueError, OverflowError) as e:
                raise ConfigError(
                    f"{key}: {e}", path=path, line=index.line_of(section, key)
                ) from e
            _set_path(data, field_path, value)
    return data


def _anchor(error: dict[str, Any], index: _LineIndex, path: str) -> ConfigError:
    loc = tuple(str(p) for p in error.get("loc", ()) if not isinstance(p, int))
    msg = str(error.get("msg", "invalid value"))
    if loc in _FIELD_TO_KEY:
        section, key = _FIELD_TO_KEY[loc]
        return ConfigError(f"{key}: {msg}", path=path, line=index.line_of(section, key))
    if loc and loc[0] in _MODEL_SECTIONS:
        return ConfigError(f"[{loc[0]}]: {msg}", path=path, line=index.line_of(loc[0]))
    if not loc:
        # The only cross-field check on the root model ties frame_len to n_b.
        return ConfigError(
            f"frame_len: {msg}", path=path, line=index.line_of("link", "frame_len")
        )
    label = ".".join(loc)
    return ConfigError(f"{label}: {msg}", path=path, line=None)


def parse_scenario(text: str, path: str = "<string>") -> ScenarioConfig:
    """Parse and validate scenario text; ``path`` is only used in diagnostics."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        line = getattr(e, "lineno", None)
        if line is None and (m := re.search(r"line (\d+)", str(e))):
            line = int(m.group(1))
        raise ConfigError(f"syntax: {e}", path=path, line=line) from e

    index = _LineIndex(text)
    data = _translate(doc, index, path)
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        errors = e.errors()
        for extra in errors[1:]:
            logger.error("%s", _anchor(dict(extra), index, path))
        raise _anchor(dict(errors[0]), index, path) from e


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Read a scenario file. OSError propagates to the caller unchanged."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    config = parse_scenario(text, str(path))
    logger.info("Loaded scenario %s (N_B=%d, N_D=%d)", path, config.n_b, config.n_d)
    return config


def scenario_from_snapshot(snapshot: dict[str, Any], source: str = "manifest") -> ScenarioConfig:
    """Rebuild a ScenarioConfig from a manifest's SI-unit config snapshot."""
    try:
        return ScenarioConfig.model_validate(snapshot)
    except ValidationError as e:
        first = e.errors()[0]
        label = ".".join(str(p) for p in first.get("loc", ())) or "config"
        raise ConfigError(f"{label}: {first.get('msg')}", path=source) from e
