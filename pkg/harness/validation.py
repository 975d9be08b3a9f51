"""
Statistical validation of the DRIS channel statistics and numerical oracle checks.

validate_propositions draws many independent realizations of one ACA entry
and one DRIS sensing-path entry and compares their moments with the
asymptotic CN(0, L N_D mu_bar) and CN(0, L N_D nu_bar) laws. Rayleigh
components and reflection states are redrawn per sample; user and target
positions (hence large-scale gains) are drawn once.

run_oracle_checks cross-checks the closed forms used elsewhere against
independent computations on a single realization.
"""

from __future__ import annotations

import cmath
import itertools
import logging
import math

import numpy as np
import scipy.stats
from numpy.typing import NDArray

from analysis.estimator import likelihood_gradient, log_likelihood
from analysis.sensing import (
    SensingModel,
    covariance_inverse,
    covariance_rl,
    fim,
    sensing_observation,
)
from channel.assembly import (
    assemble_channels,
    bs_dris_los,
    complex_gaussian,
    draw_target_position,
    draw_user_positions,
    large_scale_gains,
)
from channel.dris import (
    REFERENCE_PUBLISHED_MU_BAR,
    DrisMoments,
    draw_reflection_states,
    dris_moments,
    is_reference_profile,
    warn_if_published_mismatch,
)
from channel.geometry import steering_derivative, steering_ula, upa_angles, upa_response
from config.settings import settings
from schemas.errors import DomainError
from schemas.scenario import DrisProfile, ScenarioConfig
from schemas.validation import CheckResult, CheckStatus, ValidationRecord, tolerance_check
from waveform.solver import (
    kkt_residual,
    normalize_problem,
    solve_isac_waveform,
    solve_sensing_waveform,
)
from waveform.symbols import direct_link_amplitude, generate_symbols

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Moments
# ---------------------------------------------------------------------------


def brute_force_moments(profile: DrisProfile) -> DrisMoments:
    """mu_bar and nu_bar by walking every ordered pair of reflection coefficients."""
    alphabet = [
        (cmath.rect(amp, phase), prob)
        for amp, phase, prob in zip(profile.amplitudes, profile.phases, profile.probs, strict=True)
    ]
    mu_bar = 0.0
    for (c1, p1), (c2, p2) in itertools.product(alphabet, repeat=2):
        mu_bar += p1 * p2 * abs(c2 - c1) ** 2
    nu_bar = sum(p * abs(c) ** 2 for c, p in alphabet)
    return DrisMoments(mu_bar=mu_bar, nu_bar=nu_bar)


def moment_checks(config: ScenarioConfig) -> ValidationRecord:
    moments = dris_moments(config.dris)
    oracle = brute_force_moments(config.dris)
    tol = settings.validation.moment_atol
    record = ValidationRecord(
        checks=[
            tolerance_check(
                "mu_bar", moments.mu_bar, oracle.mu_bar, tol, detail="pairwise enumeration"
            ),
            tolerance_check("nu_bar", moments.nu_bar, oracle.nu_bar, tol),
        ]
    )
    if is_reference_profile(config.dris) and warn_if_published_mismatch(config.dris, moments):
        record.checks.append(
            CheckResult(
                name="mu_bar_published",
                observed=moments.mu_bar,
                expected=REFERENCE_PUBLISHED_MU_BAR,
                tolerance=0.0,
                status=CheckStatus.WARN,
                detail="published value for this profile differs from the enumeration",
            )
        )
    return record


# ---------------------------------------------------------------------------
# Asymptotic Gaussianity of the ACA and DRIS sensing-path entries
# ---------------------------------------------------------------------------


def _gaussian_checks(
    name: str,
    samples: NDArray[np.complex128],
    expected_var: float,
    variance_rtol: float,
    sigma_band: float,
) -> list[CheckResult]:
    m = samples.size
    var = float(np.mean(np.abs(samples - samples.mean()) ** 2))
    mean_mag = float(abs(samples.mean()))
    kurt_band = sigma_band * math.sqrt(24.0 / m)
    return [
        tolerance_check(
            f"{name}_variance", var, expected_var, variance_rtol, relative=True,
            detail=f"{m} samples",
        ),
        tolerance_check(
            f"{name}_mean", mean_mag, 0.0, sigma_band * math.sqrt(var / m),
            detail="|mean| within the sigma band",
        ),
        tolerance_check(
            f"{name}_kurtosis_re", float(scipy.stats.kurtosis(samples.real)), 0.0, kurt_band,
            detail="excess kurtosis of the real part",
        ),
        tolerance_check(
            f"{name}_kurtosis_im", float(scipy.stats.kurtosis(samples.imag)), 0.0, kurt_band,
            detail="excess kurtosis of the imaginary part",
        ),
    ]


def validate_propositions(
    config: ScenarioConfig,
    samples: int,
    rng: np.random.Generator | None = None,
    user: int = 0,
    antenna: int = 0,
) -> ValidationRecord:
    """Empirical moments of H_ACA[user, antenna] and h_D^s[antenna] over ``samples`` draws."""
    if samples < 1000:
        raise DomainError(f"need at least 1000 samples, got {samples}")
    rng = rng or np.random.default_rng(config.seed)
    cfg = settings.validation
    geo = config.geometry
    n_d = config.n_d

    users = draw_user_positions(geo, config.k_c, rng)
    target = draw_target_position(geo, rng)
    gains = large_scale_gains(geo, users, target)
    los_row = bs_dris_los(
        geo.bs, geo.dris, config.n_b, config.n_d_h, config.n_d_v, config.wavelength
    )[antenna]
    eps = config.rician_factor
    h_i_s = upa_response(
        config.n_d_h, config.n_d_v, *upa_angles(geo.dris, target), config.spacing_ratio
    )

    aca = np.empty(samples, dtype=complex)
    path = np.empty(samples, dtype=complex)
    for start in range(0, samples, cfg.chunk_size):
        count = min(cfg.chunk_size, samples - start)
        g_row = math.sqrt(gains.l_g) * (
            math.sqrt(eps / (1.0 + eps)) * los_row[None, :]
            + math.sqrt(1.0 / (1.0 + eps)) * complex_gaussian(rng, (count, n_d))
        )
        h_i = math.sqrt(gains.l_i_c[user]) * complex_gaussian(rng, (count, n_d))
        phi_pt = draw_reflection_states(config.dris, n_d, count, rng)
        phi_dt = draw_reflection_states(config.dris, n_d, count, rng)
        aca[start : start + count] = np.sum(g_row * (phi_dt - phi_pt) * h_i, axis=1).conj()
        path[start : start + count] = math.sqrt(gains.l_i_s) * np.sum(
            g_row * phi_pt * h_i_s[None, :], axis=1
        )

    moments = dris_moments(config.dris)
    record = ValidationRecord()
    record.checks.extend(
        _gaussian_checks(
            "aca",
            aca,
            gains.l_cas_c[user] * n_d * moments.mu_bar,
            cfg.variance_rtol,
            cfg.sigma_band,
        )
    )
    record.checks.extend(
        _gaussian_checks(
            "dris_path",
            path,
            gains.l_cas_s * n_d * moments.nu_bar,
            cfg.variance_rtol,
            cfg.sigma_band,
        )
    )
    logger.info(
        "Proposition checks on %d samples at N_D=%d: %d/%d passed",
        samples,
        n_d,
        sum(c.status == CheckStatus.PASS for c in record.checks),
        len(record.checks),
    )
    return record


# ---------------------------------------------------------------------------
# Oracle cross-checks on one realization
# ---------------------------------------------------------------------------


def _rel(a: NDArray[np.generic], b: NDArray[np.generic]) -> float:
    """||a - b|| / ||b||."""
    scale = max(float(np.linalg.norm(b)), np.finfo(float).tiny)
    return float(np.linalg.norm(a - b)) / scale


def run_oracle_checks(
    config: ScenarioConfig, rng: np.random.Generator | None = None
) -> ValidationRecord:
    rng = rng or np.random.default_rng(config.seed)
    channels = assemble_channels(config, rng)
    amplitude = config.symbol_amplitude or direct_link_amplitude(
        config.p0, config.n_b, channels.large_scale.l_d_c
    )
    frame = generate_symbols(config.k_c, config.frame_len, rng, amplitude=amplitude)
    h_pt, frame = normalize_problem(
        channels.h_pt, frame, float(np.mean(channels.large_scale.l_d_c))
    )
    x0 = solve_sensing_waveform(h_pt, frame, config.p0)
    x = solve_isac_waveform(h_pt, frame, x0, config.kappa, config.p0)
    model = SensingModel.from_channels(
        channels, config.chi, config.sigma2_s, dris_moments(config.dris)
    )
    theta1, theta2 = channels.theta1, channels.theta2
    record = ValidationRecord()

    scale = config.p0 / config.n_b
    cov_err = float(np.max(np.abs(x0.covariance - scale * np.eye(config.n_b)))) / scale
    record.checks.append(tolerance_check("sensing_waveform_covariance", cov_err, 0.0, 1e-8))
    target_power = config.p0 * config.frame_len
    record.checks.append(
        tolerance_check("isac_waveform_power", x.power, target_power, 1e-8, relative=True)
    )
    record.checks.append(
        tolerance_check("isac_waveform_kkt", kkt_residual(h_pt, frame, x0.x, x), 0.0, 1e-8)
    )

    x_l = x.x[:, 0]
    r = covariance_rl(theta2, x_l, model)
    sm = covariance_inverse(theta2, x_l, model)
    sm_resid = float(np.linalg.norm(r @ sm - np.eye(config.n_s)))
    record.checks.append(tolerance_check("sherman_morrison_residual", sm_resid, 0.0, 1e-9))

    f_reduced = fim(theta1, theta2, x, model, with_dris=False)
    f_limit = fim(theta1, theta2, x, model.without_dris(), with_dris=True)
    record.checks.append(
        tolerance_check(
            "fim_no_dris_reduction", _rel(f_reduced.ravel(), f_limit.ravel()), 0.0, 1e-12
        )
    )

    h = 1e-6
    delta = config.spacing_ratio
    fd = (
        steering_ula(config.n_b, theta1 + h, delta, centred=True)
        - steering_ula(config.n_b, theta1 - h, delta, centred=True)
    ) / (2.0 * h)
    analytic = steering_derivative(config.n_b, theta1, delta, centred=True)
    record.checks.append(
        tolerance_check("steering_derivative_fd", _rel(fd, analytic), 0.0, 1e-5)
    )

    observations = sensing_observation(channels, x, model, config.dris, rng)
    point = np.array([theta1 + 0.02, theta2 - 0.02])
    grad = np.array(likelihood_gradient(point, observations, x, model))
    fd_grad = np.array(
        [
            (
                log_likelihood(point + h * e, observations, x, model)
                - log_likelihood(point - h * e, observations, x, model)
            )
            / (2.0 * h)
            for e in np.eye(2)
        ]
    )
    record.checks.append(
        tolerance_check("likelihood_gradient_fd", _rel(fd_grad, grad), 0.0, 1e-5)
    )
    logger.info(
        "Oracle checks: %d/%d passed",
        sum(c.status == CheckStatus.PASS for c in record.checks),
        len(record.checks),
    )
    return record


def validate_scenario(
    config: ScenarioConfig, samples: int | None = None, rng: np.random.Generator | None = None
) -> ValidationRecord:
    """Moments, proposition checks and oracle checks in one report."""
    rng = rng or np.random.default_rng(config.seed)
    record = moment_checks(config)
    record.extend(validate_propositions(config, samples or settings.validation.samples, rng))
    record.extend(run_oracle_checks(config, rng))
    return record
