"""
Unit tests for received symbols, empirical SINR and the SINR lower bound.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from analysis.comm import (
    empirical_sinr,
    mu_residual_power,
    noise_limited_sinr,
    received_symbols,
    sinr_lower_bound,
    sum_rate,
)
from channel.assembly import assemble_channels, complex_gaussian
from channel.dris import dris_moments
from schemas.errors import DomainError
from waveform.solver import Waveform, design_waveforms
from waveform.symbols import SymbolFrame, direct_link_amplitude, generate_symbols


def _draw_link(config, seed):
    rng = np.random.default_rng(seed)
    channels = assemble_channels(config, rng)
    gains = channels.large_scale.l_d_c
    amplitude = direct_link_amplitude(config.p0, config.n_b, gains)
    frame = generate_symbols(config.k_c, config.frame_len, rng, amplitude=amplitude)
    _, w = design_waveforms(channels.h_pt, frame, config.p0, config.kappa, float(np.mean(gains)))
    return channels, frame, w


@pytest.fixture
def link(small_config):
    """Channels, frame and ISAC waveform for one small realization."""
    return _draw_link(small_config, 21)


class TestSumRate:
    """log2(1 + SINR) summed over users."""

    def test_known_values(self):
        assert sum_rate(np.array([1.0, 3.0])) == pytest.approx(3.0)

    def test_zero_sinr(self):
        assert sum_rate(np.zeros(4)) == 0.0

    def test_noise_limited(self, rng):
        frame = generate_symbols(3, 8, rng, amplitude=2.0)
        np.testing.assert_allclose(noise_limited_sinr(frame, 3, 0.5), [8.0, 8.0, 8.0])


class TestReceivedSymbols:
    """y = a s + MU residual + ACA + noise."""

    def test_decomposition(self, link, small_config):
        channels, frame, w = link
        sigma2 = small_config.sigma2_c
        y = received_symbols(channels, w, frame, sigma2, np.random.default_rng(4))
        noise = math.sqrt(sigma2) * complex_gaussian(np.random.default_rng(4), frame.s.shape)
        np.testing.assert_allclose(y - noise, channels.h_dt @ w.x, rtol=1e-9, atol=1e-20)

    def test_waveform_shape_mismatch_rejected(self, link):
        channels, frame, _ = link
        wrong = Waveform(x=np.ones((4, 4), dtype=complex), p0=1.0, kappa=0.0)
        with pytest.raises(DomainError):
            received_symbols(channels, wrong, frame, 1.0, np.random.default_rng(0))


class TestSinr:
    """Empirical SINR against its closed-form lower bound."""

    def test_without_dris_is_deterministic(self, link, small_config, rng):
        channels, frame, w = link
        bare = channels.without_dris()
        report = empirical_sinr(bare, w, frame, small_config.dris, small_config.sigma2_c, 8, rng)
        mu = mu_residual_power(bare.h_pt, w, frame)
        expected = frame.amplitude**2 / (mu + small_config.sigma2_c)
        np.testing.assert_allclose(report.sinr, expected, rtol=1e-12)
        np.testing.assert_array_equal(report.sinr_stderr, 0.0)
        assert report.trials == 8

    def test_bound_formula(self, link, small_config):
        channels, frame, w = link
        moments = dris_moments(small_config.dris)
        bound = sinr_lower_bound(
            channels.h_pt, w, frame, channels.large_scale, moments, 64, small_config.sigma2_c
        )
        mu = np.mean(np.abs(channels.h_pt @ w.x - frame.target) ** 2, axis=1)
        aca = small_config.p0 * channels.large_scale.l_cas_c * 64 * moments.mu_bar
        np.testing.assert_allclose(bound, frame.amplitude**2 / (mu + aca + small_config.sigma2_c))

    def test_aca_lowers_sinr(self, small_config, rng):
        config = small_config.evolve(n_d_h=32, n_d_v=32)
        channels, frame, w = _draw_link(config, 21)
        with_dris = empirical_sinr(channels, w, frame, config.dris, config.sigma2_c, 16, rng)
        bare = empirical_sinr(
            channels.without_dris(), w, frame, config.dris, config.sigma2_c, 1, rng
        )
        assert with_dris.sum_rate < bare.sum_rate
        assert np.all(with_dris.sinr_stderr > 0.0)
        assert np.all(with_dris.sinr < noise_limited_sinr(frame, config.k_c, config.sigma2_c))

    def test_bound_saturates_with_power(self, link, small_config):
        channels, frame, w = link
        moments = dris_moments(small_config.dris)

        def bound_at(scale: float) -> np.ndarray:
            scaled_w = Waveform(x=math.sqrt(scale) * w.x, p0=scale * w.p0, kappa=w.kappa)
            scaled_frame = SymbolFrame(s=frame.s, amplitude=math.sqrt(scale) * frame.amplitude)
            return sinr_lower_bound(
                channels.h_pt,
                scaled_w,
                scaled_frame,
                channels.large_scale,
                moments,
                64,
                small_config.sigma2_c,
            )

        ratio = bound_at(1e6) / bound_at(1e4)
        assert np.all(ratio >= 1.0 - 1e-12)
        assert np.all(ratio < 1.01)

    def test_trials_must_be_positive(self, link, small_config, rng):
        channels, frame, w = link
        with pytest.raises(DomainError):
            empirical_sinr(channels, w, frame, small_config.dris, 1.0, 0, rng)
