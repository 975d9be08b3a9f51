"""
Symbol frames — unit-power QPSK targets for the communication users.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from schemas.errors import DomainError

QPSK = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class SymbolFrame:
    """K_c x L unit-power symbols and the common amplitude the users should receive."""

    s: NDArray[np.complex128]
    amplitude: float = 1.0

    @property
    def target(self) -> NDArray[np.complex128]:
        """Desired noiseless received matrix a*S."""
        return self.amplitude * self.s

    @property
    def k_c(self) -> int:
        return int(self.s.shape[0])

    @property
    def frame_len(self) -> int:
        return int(self.s.shape[1])

    @property
    def mean_power(self) -> float:
        return float(np.mean(np.abs(self.s) ** 2))


def generate_symbols(
    k_c: int, frame_len: int, rng: np.random.Generator, amplitude: float = 1.0
) -> SymbolFrame:
    if k_c < 1 or frame_len < 1:
        raise DomainError(f"need k_c, frame_len >= 1, got {k_c}, {frame_len}")
    if not amplitude > 0.0:
        raise DomainError(f"symbol amplitude must be positive, got {amplitude!r}")
    s = QPSK[rng.integers(0, 4, size=(k_c, frame_len))]
    s.setflags(write=False)
    return SymbolFrame(s=s, amplitude=amplitude)


def direct_link_amplitude(p0: float, n_b: int, l_d_c: tuple[float, ...]) -> float:
    """
    Amplitude whose square is one user's equal share of the direct-link array gain,
    P0 * N_B * mean_k(L_d,k) / K_c.
    """
    return math.sqrt(p0 * n_b * float(np.mean(l_d_c)) / len(l_d_c))
