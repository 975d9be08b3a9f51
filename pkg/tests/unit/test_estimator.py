"""
Unit tests for the maximum-likelihood angle estimator.
"""

from __future__ import annotations

import logging
import math

import numpy as np
import pytest

from analysis.estimator import (
    grid_search_init,
    likelihood_gradient,
    log_likelihood,
    mle_estimate,
    wrap_angle,
)
from analysis.sensing import SensingModel, covariance_rl, dris_power, mean_vectors
from channel.assembly import complex_gaussian
from channel.geometry import steering_ula
from config.settings import settings
from schemas.errors import DomainError
from waveform.solver import Waveform

TRUTH = (0.35, -0.5)


def _model(l_cas: float = 0.01, sigma2_s: float = 1e-2) -> SensingModel:
    return SensingModel(
        n_b=4,
        n_s=4,
        chi=0.9,
        l_d1=1.0,
        l_d2=1.0,
        l_cas=l_cas,
        n_d=4,
        nu_bar=1.0,
        sigma2_s=sigma2_s,
    )


def _simulate(theta, w, model, rng):
    """Snapshots drawn from the model itself: mean + DRIS term + noise."""
    mean = mean_vectors(theta[0], theta[1], w.x, model)
    a_s = steering_ula(model.n_s, theta[1], model.delta, centred=True)
    q = dris_power(w.x, model)
    dris = a_s[:, None] * (np.sqrt(q) * complex_gaussian(rng, (w.frame_len,)))[None, :]
    noise = math.sqrt(model.sigma2_s) * complex_gaussian(rng, (model.n_s, w.frame_len))
    return mean + dris + noise


@pytest.fixture
def waveform() -> Waveform:
    x = complex_gaussian(np.random.default_rng(17), (4, 16)) * 0.5
    return Waveform(x=x, p0=float(np.sum(np.abs(x) ** 2)) / 16, kappa=0.0)


@pytest.fixture
def model() -> SensingModel:
    return _model()


@pytest.fixture
def observations(waveform, model):
    return _simulate(TRUTH, waveform, model, np.random.default_rng(23))


class TestWrapAngle:
    """Reflection into the broadside interval."""

    @pytest.mark.parametrize("theta", [0.0, 0.7, -1.2, math.pi / 2])
    def test_inside_unchanged(self, theta):
        assert wrap_angle(theta) == pytest.approx(theta)

    def test_reflects_beyond_endfire(self):
        assert wrap_angle(math.pi / 2 + 0.2) == pytest.approx(math.pi / 2 - 0.2)
        assert wrap_angle(-math.pi / 2 - 0.1) == pytest.approx(-math.pi / 2 + 0.1)

    def test_preserves_steering(self):
        theta = 2.0
        np.testing.assert_allclose(
            steering_ula(8, wrap_angle(theta)), steering_ula(8, theta), atol=1e-12
        )


class TestLogLikelihood:
    """Gaussian log-likelihood and its gradient."""

    def test_matches_dense_evaluation(self, observations, waveform, model):
        theta = (0.3, -0.45)
        resid = observations - mean_vectors(*theta, waveform.x, model)
        expected = 0.0
        for col in range(16):
            r = covariance_rl(theta[1], waveform.x[:, col], model)
            _, logdet = np.linalg.slogdet(r)
            quad = np.real(resid[:, col].conj() @ np.linalg.solve(r, resid[:, col]))
            expected -= logdet + quad
        value = log_likelihood(theta, observations, waveform, model)
        assert value == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("l_cas", [0.0, 0.01, 0.5])
    def test_gradient_matches_finite_differences(self, waveform, l_cas):
        model = _model(l_cas=l_cas)
        obs = _simulate(TRUTH, waveform, model, np.random.default_rng(31))
        theta = np.array([0.3, -0.42])
        h = 1e-6
        g1, g2 = likelihood_gradient(theta, obs, waveform, model)

        def ll(t):
            return log_likelihood(t, obs, waveform, model)

        fd1 = (ll(theta + [h, 0.0]) - ll(theta - [h, 0.0])) / (2 * h)
        fd2 = (ll(theta + [0.0, h]) - ll(theta - [0.0, h])) / (2 * h)
        assert g1 == pytest.approx(fd1, rel=1e-4, abs=1e-3)
        assert g2 == pytest.approx(fd2, rel=1e-4, abs=1e-3)

    def test_truth_beats_distant_angles(self, observations, waveform, model):
        at_truth = log_likelihood(TRUTH, observations, waveform, model)
        assert at_truth > log_likelihood((-0.6, 0.4), observations, waveform, model)

    def test_shape_mismatch_rejected(self, waveform, model):
        with pytest.raises(DomainError):
            log_likelihood(TRUTH, np.zeros((3, 16), dtype=complex), waveform, model)
        with pytest.raises(DomainError):
            likelihood_gradient(TRUTH, np.zeros((4, 8), dtype=complex), waveform, model)


class TestGridSearch:
    """Coarse initialisation over the angle grid."""

    def test_lands_near_truth(self, observations, waveform, model):
        theta1, theta2 = grid_search_init(observations, waveform, model)
        assert abs(math.degrees(theta1 - TRUTH[0])) < 2.5
        assert abs(math.degrees(theta2 - TRUTH[1])) < 2.5

    def test_is_the_grid_maximiser(self, observations, waveform, model):
        spacing = math.radians(10.0)
        grid = np.arange(-math.pi / 2 + spacing / 2, math.pi / 2, spacing)
        assert grid.size == 18
        scores = np.array(
            [
                [log_likelihood((t1, t2), observations, waveform, model) for t2 in grid]
                for t1 in grid
            ]
        )
        i, j = np.unravel_index(int(np.argmax(scores)), scores.shape)
        init = grid_search_init(observations, waveform, model, spacing_deg=10.0)
        assert init == pytest.approx((grid[i], grid[j]))

    def test_shape_mismatch_rejected(self, waveform, model):
        with pytest.raises(DomainError):
            grid_search_init(np.zeros((4, 3), dtype=complex), waveform, model)


class TestMle:
    """Gradient-ascent refinement."""

    def test_converges_near_truth(self, observations, waveform, model):
        result = mle_estimate(observations, waveform, model)
        assert result.converged
        assert abs(math.degrees(result.theta_hat[0] - TRUTH[0])) < 1.0
        assert abs(math.degrees(result.theta_hat[1] - TRUTH[1])) < 1.0

    def test_improves_on_truth(self, observations, waveform, model):
        result = mle_estimate(observations, waveform, model)
        at_truth = log_likelihood(TRUTH, observations, waveform, model)
        assert result.log_likelihood >= at_truth - 1e-9 * abs(at_truth)
        assert result.log_likelihood == pytest.approx(
            log_likelihood(result.theta_hat, observations, waveform, model)
        )

    def test_explicit_init_skips_grid(self, observations, waveform, model):
        result = mle_estimate(observations, waveform, model, init=(0.33, -0.48))
        assert result.converged
        assert abs(math.degrees(result.theta_hat[0] - TRUTH[0])) < 1.0

    def test_iteration_cap_warns(self, observations, waveform, model, caplog):
        with caplog.at_level(logging.WARNING, logger="analysis.estimator"):
            result = mle_estimate(
                observations, waveform, model, init=(0.3, -0.45), max_iter=1
            )
        assert not result.converged
        assert result.iterations == 1
        assert "did not converge" in caplog.text

    def test_no_ascent_step_is_stalled_not_converged(
        self, observations, waveform, model, caplog, monkeypatch
    ):
        monkeypatch.setattr(settings.estimator, "max_halvings", 0)
        with caplog.at_level(logging.WARNING, logger="analysis.estimator"):
            result = mle_estimate(observations, waveform, model, init=(0.3, -0.45))
        assert result.stalled
        assert not result.converged
        assert result.iterations == 1
        assert result.theta_hat == pytest.approx((0.3, -0.45))
        assert "stalled" in caplog.text

    def test_converged_run_is_not_stalled(self, observations, waveform, model):
        assert not mle_estimate(observations, waveform, model, init=(0.33, -0.48)).stalled

    def test_invariant_to_joint_column_permutation(self, observations, waveform, model):
        order = np.random.default_rng(5).permutation(waveform.frame_len)
        shuffled = Waveform(x=waveform.x[:, order], p0=waveform.p0, kappa=waveform.kappa)
        base = mle_estimate(observations, waveform, model, init=(0.3, -0.45))
        permuted = mle_estimate(observations[:, order], shuffled, model, init=(0.3, -0.45))
        assert permuted.theta_hat == pytest.approx(base.theta_hat, abs=1e-6)
        assert permuted.log_likelihood == pytest.approx(base.log_likelihood, rel=1e-9)

    @pytest.mark.parametrize("kwargs", [{"zeta": 0.0}, {"zeta": -1.0}, {"sigma_thresh": 0.0}])
    def test_bad_step_parameters(self, observations, waveform, model, kwargs):
        with pytest.raises(DomainError):
            mle_estimate(observations, waveform, model, init=TRUTH, **kwargs)
