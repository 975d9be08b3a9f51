"""
Unit tests for the sensing-optimal and Pareto ISAC waveform solvers.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.linalg

from channel.assembly import complex_gaussian
from schemas.errors import DomainError, InfeasibleConstraintError
from waveform.solver import (
    Waveform,
    comm_residual,
    design_waveforms,
    isac_objective,
    kkt_residual,
    normal_equations,
    normalize_problem,
    sensing_residual,
    solve_isac_waveform,
    solve_sensing_waveform,
)
from waveform.symbols import SymbolFrame, generate_symbols

P0 = 1.0


@pytest.fixture
def problem():
    """Two users, four antennas, L = 16, unit-variance channel."""
    rng = np.random.default_rng(7)
    h = complex_gaussian(rng, (2, 4))
    frame = generate_symbols(2, 16, rng)
    return h, frame


class TestSensingWaveform:
    """Orthogonal-Procrustes X0."""

    def test_covariance_constraint(self, problem):
        h, frame = problem
        x0 = solve_sensing_waveform(h, frame, P0)
        np.testing.assert_allclose(x0.covariance, (P0 / 4) * np.eye(4), atol=1e-12)
        assert x0.power == pytest.approx(P0 * 16)
        assert x0.kappa == 0.0

    def test_scalar_case(self):
        s = generate_symbols(1, 4, np.random.default_rng(0))
        x0 = solve_sensing_waveform(np.ones((1, 1), dtype=complex), s, 2.0)
        expected = math.sqrt(2.0 * 4) * s.s / np.linalg.norm(s.s)
        np.testing.assert_allclose(x0.x, expected, atol=1e-12)

    def test_best_fit_among_feasible_rotations(self, problem):
        h, frame = problem
        x0 = solve_sensing_waveform(h, frame, P0)
        rng = np.random.default_rng(1)
        best = comm_residual(h, x0.x, frame)
        for _ in range(200):
            q, _ = np.linalg.qr(complex_gaussian(rng, (16, 16)))
            candidate = math.sqrt(P0 * 16 / 4) * q[:4, :]
            assert best <= comm_residual(h, candidate, frame) + 1e-9

    def test_short_frame_infeasible(self):
        rng = np.random.default_rng(2)
        h = complex_gaussian(rng, (2, 4))
        frame = generate_symbols(2, 3, rng)
        with pytest.raises(InfeasibleConstraintError):
            solve_sensing_waveform(h, frame, P0)

    def test_user_count_mismatch(self, problem):
        _, frame = problem
        with pytest.raises(DomainError):
            solve_sensing_waveform(np.ones((3, 4), dtype=complex), frame, P0)

    def test_nonpositive_power_rejected(self, problem):
        h, frame = problem
        with pytest.raises(DomainError):
            solve_sensing_waveform(h, frame, 0.0)


class TestIsacWaveform:
    """Exact secular-equation solution of the kappa-weighted problem."""

    @pytest.fixture
    def x0(self, problem):
        h, frame = problem
        return solve_sensing_waveform(h, frame, P0)

    def test_kappa_zero_returns_x0(self, problem, x0):
        h, frame = problem
        w = solve_isac_waveform(h, frame, x0, 0.0, P0)
        np.testing.assert_allclose(w.x, x0.x, atol=1e-10)

    @pytest.mark.parametrize("kappa", [0.1, 0.2, 0.5, 0.9])
    def test_power_and_stationarity(self, problem, x0, kappa):
        h, frame = problem
        w = solve_isac_waveform(h, frame, x0, kappa, P0)
        assert w.power == pytest.approx(P0 * 16, rel=1e-10)
        assert kkt_residual(h, frame, x0.x, w) < 1e-9
        assert not w.hard_case

    @pytest.mark.parametrize("kappa", [0.2, 0.7])
    def test_second_order_condition(self, problem, x0, kappa):
        h, frame = problem
        w = solve_isac_waveform(h, frame, x0, kappa, P0)
        aha, _ = normal_equations(h, frame, x0.x, kappa)
        lam_min = float(scipy.linalg.eigvalsh(aha)[0])
        assert w.multiplier + lam_min >= -1e-10

    @pytest.mark.parametrize("kappa", [0.2, 0.6])
    def test_beats_random_feasible_points(self, problem, x0, kappa):
        h, frame = problem
        w = solve_isac_waveform(h, frame, x0, kappa, P0)
        best = isac_objective(h, w.x, frame, x0.x, kappa)

        z = complex_gaussian(np.random.default_rng(3), (1000, 4, 16))
        z *= math.sqrt(P0 * 16) / np.linalg.norm(z, axis=(1, 2), keepdims=True)
        comm = np.sum(np.abs(np.einsum("kn,bnl->bkl", h, z) - frame.target) ** 2, axis=(1, 2))
        sens = np.sum(np.abs(z - x0.x) ** 2, axis=(1, 2))
        assert best <= float(np.min(kappa * comm + (1 - kappa) * sens))
        assert best <= isac_objective(h, x0.x, frame, x0.x, kappa) + 1e-12

    def test_tradeoff_is_monotone(self, problem, x0):
        h, frame = problem
        kappas = np.linspace(0.05, 0.95, 10)
        solutions = [solve_isac_waveform(h, frame, x0, k, P0) for k in kappas]
        comm = [comm_residual(h, w.x, frame) for w in solutions]
        sens = [sensing_residual(w.x, x0.x) for w in solutions]
        assert all(b <= a * (1 + 1e-9) + 1e-12 for a, b in zip(comm, comm[1:]))
        assert all(b >= a * (1 - 1e-9) - 1e-12 for a, b in zip(sens, sens[1:]))

    def test_hard_case_fits_symbols(self, problem):
        h, frame = problem
        p0 = 1e4
        x0 = solve_sensing_waveform(h, frame, p0)
        w = solve_isac_waveform(h, frame, x0, 1.0, p0)
        assert w.hard_case
        assert w.power == pytest.approx(p0 * 16, rel=1e-10)
        assert comm_residual(h, w.x, frame) < 1e-10 * np.linalg.norm(frame.target) ** 2
        assert kkt_residual(h, frame, x0.x, w) < 1e-8

    def test_kappa_one_on_the_sphere(self, problem):
        h, frame = problem
        least_norm = np.linalg.pinv(h) @ frame.target
        p0 = 0.01 * float(np.linalg.norm(least_norm) ** 2) / 16
        x0 = solve_sensing_waveform(h, frame, p0)
        w = solve_isac_waveform(h, frame, x0, 1.0, p0)
        assert not w.hard_case
        assert w.power == pytest.approx(p0 * 16, rel=1e-10)
        assert kkt_residual(h, frame, x0.x, w) < 1e-8
        assert w.multiplier > 0.0

    def test_bad_kappa_rejected(self, problem, x0):
        h, frame = problem
        with pytest.raises(DomainError):
            solve_isac_waveform(h, frame, x0, 1.5, P0)

    def test_infeasible_x0_rejected(self, problem, x0):
        h, frame = problem
        half = Waveform(x=0.5 * x0.x, p0=P0, kappa=0.0)
        with pytest.raises(DomainError):
            solve_isac_waveform(h, frame, half, 0.2, P0)

    def test_wrong_x0_shape_rejected(self, problem):
        h, frame = problem
        bad = Waveform(x=np.ones((4, 8), dtype=complex), p0=P0, kappa=0.0)
        with pytest.raises(DomainError):
            solve_isac_waveform(h, frame, bad, 0.2, P0)

    def test_kkt_needs_multiplier(self, problem, x0):
        h, frame = problem
        with pytest.raises(DomainError):
            kkt_residual(h, frame, x0.x, x0)


def _projected_gradient(
    h: np.ndarray, frame: SymbolFrame, x0: np.ndarray, kappa: float, p0: float, start: np.ndarray
) -> np.ndarray:
    """Gradient steps on the kappa-weighted objective, each rescaled onto ||X||_F^2 = P0 L."""
    aha, ahb = normal_equations(h, frame, x0, kappa)
    radius = math.sqrt(p0 * frame.frame_len)
    step = 0.5 / float(scipy.linalg.eigvalsh(aha)[-1])
    x = radius * start / np.linalg.norm(start)
    for _ in range(50_000):
        y = x - step * (aha @ x - ahb)
        nxt = radius * y / np.linalg.norm(y)
        if np.linalg.norm(nxt - x) <= 1e-13 * radius:
            return nxt
        x = nxt
    return x


class TestProjectedGradientAgreement:
    """Secular-equation solution against an iterative sphere-constrained descent."""

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_projected_gradient(self, seed):
        rng = np.random.default_rng(100 + seed)
        h = complex_gaussian(rng, (4, 8))
        frame = generate_symbols(4, 16, rng)
        kappa = float(rng.uniform(0.1, 0.9))
        x0 = solve_sensing_waveform(h, frame, P0)
        w = solve_isac_waveform(h, frame, x0, kappa, P0)

        starts = (x0.x, complex_gaussian(rng, (8, 16)), complex_gaussian(rng, (8, 16)))
        oracle = min(
            isac_objective(h, _projected_gradient(h, frame, x0.x, kappa, P0, s), frame, x0.x, kappa)
            for s in starts
        )
        exact = isac_objective(h, w.x, frame, x0.x, kappa)
        assert exact == pytest.approx(oracle, rel=1e-6)
        assert exact <= oracle * (1 + 1e-9)
        assert kkt_residual(h, frame, x0.x, w) < 1e-8


class TestNormalizedDesign:
    """Waveform design on a gain-normalized channel."""

    def test_tiny_channel_collapses_without_normalization(self, problem):
        h, frame = problem
        weak_h = 1e-6 * h
        weak_frame = SymbolFrame(s=frame.s, amplitude=1e-6)
        x0 = solve_sensing_waveform(weak_h, weak_frame, P0)
        raw = solve_isac_waveform(weak_h, weak_frame, x0, 0.2, P0)
        assert sensing_residual(raw.x, x0.x) < 1e-9 * x0.power

        nx0, normalized = design_waveforms(weak_h, weak_frame, P0, 0.2, gain=1e-12)
        assert sensing_residual(normalized.x, nx0.x) > 1e-3 * nx0.power

    def test_matches_unit_problem(self):
        rng = np.random.default_rng(8)
        h = complex_gaussian(rng, (4, 4))
        frame = generate_symbols(4, 16, rng)
        x0_ref = solve_sensing_waveform(h, frame, P0)
        x_ref = solve_isac_waveform(h, frame, x0_ref, 0.3, P0)
        scaled = SymbolFrame(s=frame.s, amplitude=1e-5)
        x0, x = design_waveforms(1e-5 * h, scaled, P0, 0.3, gain=1e-10)
        np.testing.assert_allclose(x0.x, x0_ref.x, atol=1e-9)
        np.testing.assert_allclose(x.x, x_ref.x, atol=1e-9)

    def test_normalize_scales_both(self, problem):
        h, frame = problem
        nh, nframe = normalize_problem(h, frame, 4.0)
        np.testing.assert_allclose(nh, h / 2.0)
        assert nframe.amplitude == pytest.approx(frame.amplitude / 2.0)

    @pytest.mark.parametrize("gain", [0.0, -1.0, math.inf])
    def test_bad_gain_rejected(self, problem, gain):
        h, frame = problem
        with pytest.raises(DomainError):
            normalize_problem(h, frame, gain)
