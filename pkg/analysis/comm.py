"""
Communication analysis — received symbols, empirical SINR and its lower bound.

The BS precodes against the PT-phase channel H_PT while data travels over
H_DT = H_PT + H_ACA. Per user, the received symbol decomposes as

    y = a s + (H_PT x - a s) + H_ACA x + n
          ^ MU residual       ^ ACA interference

SINR expectations are over the symbols of one frame, the noise and the DT
reflection state, holding the PT channel fixed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from channel.assembly import ChannelSet, LargeScaleGains, complex_gaussian
from channel.dris import DrisMoments, ReflectionState, draw_reflection_state, dris_moments
from schemas.errors import DomainError
from schemas.scenario import DrisProfile
from waveform.solver import Waveform
from waveform.symbols import SymbolFrame

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


@dataclass
class CommReport:
    """Per-user SINRs (linear) and the resulting sum rates (bits/s/Hz)."""

    sinr: FloatArray
    sinr_stderr: FloatArray
    bound_sinr: FloatArray
    trials: int = 1

    @property
    def sum_rate(self) -> float:
        return sum_rate(self.sinr)

    @property
    def bound_sum_rate(self) -> float:
        return sum_rate(self.bound_sinr)


def sum_rate(sinr: FloatArray) -> float:
    """sum_k log2(1 + gamma_k)."""
    return float(np.sum(np.log2(1.0 + np.asarray(sinr))))


def mu_residual_power(
    h_pt: NDArray[np.complex128], w: Waveform, frame: SymbolFrame
) -> FloatArray:
    """Per-user mean over the frame of |h_PT,k^H x_l - a s_k,l|^2."""
    return np.mean(np.abs(h_pt @ w.x - frame.target) ** 2, axis=1)


def received_symbols(
    channels: ChannelSet,
    w: Waveform,
    frame: SymbolFrame,
    sigma2_c: float,
    rng: np.random.Generator,
) -> NDArray[np.complex128]:
    """K_c x L received matrix over the DT channel with CN(0, sigma2_c) noise."""
    if w.x.shape != (channels.n_b, frame.frame_len):
        raise DomainError(f"waveform {w.x.shape} does not match channels/frame")
    target = frame.target
    mu = channels.h_pt @ w.x - target
    aca = channels.h_aca @ w.x
    noise = math.sqrt(sigma2_c) * complex_gaussian(rng, target.shape)
    return target + mu + aca + noise


def sinr_lower_bound(
    h_pt: NDArray[np.complex128],
    w: Waveform,
    frame: SymbolFrame,
    large_scale: LargeScaleGains,
    moments: DrisMoments,
    n_d: int,
    sigma2_c: float,
) -> FloatArray:
    """a^2 / (MU_k + P0 L_cas,k N_D mu_bar + sigma2_c) per user."""
    mu = mu_residual_power(h_pt, w, frame)
    aca = w.p0 * large_scale.l_cas_c * n_d * moments.mu_bar
    return frame.amplitude**2 / (mu + aca + sigma2_c)


def empirical_sinr(
    channels: ChannelSet,
    w: Waveform,
    frame: SymbolFrame,
    profile: DrisProfile,
    sigma2_c: float,
    trials: int,
    rng: np.random.Generator,
) -> CommReport:
    """
    Monte Carlo SINR: |MU + ACA|^2 averaged over the frame and ``trials``
    redraws of the DT reflection state, plus sigma2_c.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    h_pt = channels.h_pt
    mu = h_pt @ w.x - frame.target

    interference = np.empty((trials, channels.k_c))
    for t in range(trials):
        if channels.dris_enabled:
            state: ReflectionState = draw_reflection_state(profile, channels.n_d, rng)
            err = mu + channels.aca_for(state) @ w.x
        else:
            err = mu
        interference[t] = np.mean(np.abs(err) ** 2, axis=1)

    mean_int = interference.mean(axis=0)
    if trials > 1:
        stderr_int = interference.std(axis=0, ddof=1) / math.sqrt(trials)
    else:
        stderr_int = np.zeros_like(mean_int)
    signal = frame.amplitude**2
    denom = mean_int + sigma2_c
    sinr = signal / denom
    # Delta method on gamma = a^2 / (I + sigma^2).
    sinr_stderr = signal * stderr_int / denom**2

    bound = sinr_lower_bound(
        h_pt, w, frame, channels.large_scale, dris_moments(profile), channels.n_d, sigma2_c
    )
    logger.debug("Empirical SINR over %d DT redraws: %s", trials, sinr)
    return CommReport(sinr=sinr, sinr_stderr=sinr_stderr, bound_sinr=bound, trials=trials)


def noise_limited_sinr(frame: SymbolFrame, k_c: int, sigma2_c: float) -> FloatArray:
    """SINR with neither MU nor ACA interference (ideal communication waveform)."""
    return np.full(k_c, frame.amplitude**2 / sigma2_c)
