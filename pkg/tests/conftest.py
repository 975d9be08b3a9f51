"""
Shared fixtures: a desk-sized scenario and the bundled reference scenario file.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from schemas.scenario import ScenarioConfig, reference_scenario

REFERENCE_TOML = Path(__file__).resolve().parents[1] / "scenarios" / "reference.toml"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_config() -> ScenarioConfig:
    """4-antenna BS and receiver, 8x8 DRIS, two users, L = 16."""
    return reference_scenario(n_b=4, n_s=4, n_d_h=8, n_d_v=8, k_c=2, frame_len=16)


@pytest.fixture
def reference_toml() -> Path:
    return REFERENCE_TOML
