"""
Per-cell random streams.

Every (sweep point, trial) cell gets its own Philox generator keyed by the
master seed and the cell coordinates, so results do not depend on which
worker runs a cell or in what order.
"""

from __future__ import annotations

import numpy as np


def cell_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent counter-based stream for the cell addressed by ``keys``."""
    seq = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(seq))
