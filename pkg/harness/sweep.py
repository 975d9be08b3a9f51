"""
Monte Carlo sweeps over transmit power, DRIS size or BS-DRIS distance.

Sweep points x trials form a work grid run on a thread pool. Each cell draws
a fresh scenario realization from its own stream, designs the waveforms and
evaluates the requested metrics; aggregation happens afterwards in a fixed
order, so results are identical for any worker count.
"""

from __future__ import annotations

import logging
import math
import os
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from pydantic import ValidationError

from analysis.comm import empirical_sinr, noise_limited_sinr, sum_rate
from analysis.estimator import mle_estimate
from analysis.sensing import SensingModel, sensing_observation, sensing_report
from channel.assembly import assemble_channels
from channel.dris import dris_moments
from config.settings import settings
from harness.streams import cell_rng
from schemas.errors import ConfigError, DiscoIsacError, DomainError
from schemas.scenario import ScenarioConfig, dbm_to_watts
from schemas.sweep import (
    Benchmark,
    Metric,
    PointError,
    SweepAxis,
    SweepRecord,
    SweepSpec,
    benchmark_label,
)
from waveform.solver import Waveform, design_waveforms
from waveform.symbols import direct_link_amplitude, generate_symbols

logger = logging.getLogger(__name__)

RAD2_TO_DEG2 = (180.0 / math.pi) ** 2

TrialValues = dict[tuple[str, Metric], float]


@dataclass
class SweepResult:
    """Aggregated records plus any points that could not be evaluated."""

    records: list[SweepRecord] = field(default_factory=list)
    errors: list[PointError] = field(default_factory=list)
    point_runtimes: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors

    def select(self, benchmark: str, metric: Metric) -> list[SweepRecord]:
        return [r for r in self.records if r.benchmark == benchmark and r.metric == metric]


def mse(truths: Sequence[float], estimates: Sequence[float]) -> float:
    """(1/N) sum_n (theta_n - theta_hat_n)^2."""
    t = np.asarray(truths, dtype=float)
    e = np.asarray(estimates, dtype=float)
    if t.shape != e.shape or t.ndim != 1:
        raise DomainError(f"length mismatch: {t.shape} truths vs {e.shape} estimates")
    if t.size == 0:
        raise DomainError("mse needs at least one pair")
    return float(np.mean((t - e) ** 2))


def point_config(config: ScenarioConfig, axis: SweepAxis, value: float) -> ScenarioConfig:
    """Scenario at one sweep point; raises ConfigError if the value is unusable."""
    try:
        if axis is SweepAxis.POWER_DBM:
            return config.evolve(p0=dbm_to_watts(value))
        if axis is SweepAxis.N_D:
            n = int(round(value))
            side = math.isqrt(n) if n > 0 else 0
            if n != value or side * side != n or n == 0:
                raise ConfigError(f"n_d={value!r} is not a positive perfect square")
            return config.evolve(n_d_h=side, n_d_v=side)
        _, y, z = config.geometry.dris
        geometry = config.geometry.model_copy(update={"dris": (-value, y, z)})
        return config.evolve(geometry=geometry)
    except ValidationError as e:
        raise ConfigError(f"{axis.value}={value!r}: {e.errors()[0]['msg']}") from e


# ---------------------------------------------------------------------------
# One cell
# ---------------------------------------------------------------------------


def evaluate_trial(
    config: ScenarioConfig,
    spec: SweepSpec,
    rng: np.random.Generator,
    dt_redraws: int | None = None,
) -> TrialValues:
    """Draw one realization and evaluate every requested (benchmark, metric)."""
    dt_redraws = dt_redraws or settings.harness.dt_redraws
    metrics = set(spec.metrics)
    channels = assemble_channels(config, rng)
    amplitude = config.symbol_amplitude or direct_link_amplitude(
        config.p0, config.n_b, channels.large_scale.l_d_c
    )
    frame = generate_symbols(config.k_c, config.frame_len, rng, amplitude=amplitude)
    moments = dris_moments(config.dris)
    direct_gain = float(np.mean(channels.large_scale.l_d_c))
    out: TrialValues = {}

    if Benchmark.COMM_WAVEFORM in spec.waveforms and Metric.SUM_RATE in metrics:
        ideal = noise_limited_sinr(frame, config.k_c, config.sigma2_c)
        out[(benchmark_label(Benchmark.COMM_WAVEFORM), Metric.SUM_RATE)] = sum_rate(ideal)

    designed = [
        b for b in (Benchmark.ISAC_WAVEFORM, Benchmark.SENSING_WAVEFORM) if b in spec.waveforms
    ]
    truth = (channels.theta1, channels.theta2)
    for variant in spec.variants:
        with_dris = variant is Benchmark.WITH_DRIS
        ch = channels if with_dris else channels.without_dris()
        if not designed:
            break
        x0, x = design_waveforms(ch.h_pt, frame, config.p0, config.kappa, direct_gain)
        waveforms: dict[Benchmark, Waveform] = {
            Benchmark.SENSING_WAVEFORM: x0,
            Benchmark.ISAC_WAVEFORM: x,
        }
        model = SensingModel.from_channels(ch, config.chi, config.sigma2_s, moments)

        for waveform in designed:
            w = waveforms[waveform]
            label = benchmark_label(waveform, variant)
            if metrics & {Metric.SUM_RATE, Metric.SINR_BOUND}:
                report = empirical_sinr(
                    ch, w, frame, config.dris, config.sigma2_c, dt_redraws, rng
                )
                if Metric.SUM_RATE in metrics:
                    out[(label, Metric.SUM_RATE)] = report.sum_rate
                if Metric.SINR_BOUND in metrics and with_dris:
                    out[(label, Metric.SINR_BOUND)] = report.bound_sum_rate
            if metrics & {Metric.CRLB_AOD, Metric.CRLB_AOA}:
                sensing = sensing_report(*truth, w, model, with_dris=with_dris)
                if Metric.CRLB_AOD in metrics:
                    out[(label, Metric.CRLB_AOD)] = sensing.crlb_theta1 * RAD2_TO_DEG2
                if Metric.CRLB_AOA in metrics:
                    out[(label, Metric.CRLB_AOA)] = sensing.crlb_theta2 * RAD2_TO_DEG2
            if metrics & {Metric.MSE_AOD, Metric.MSE_AOA}:
                observations = sensing_observation(ch, w, model, config.dris, rng)
                estimate = mle_estimate(observations, w, model).theta_hat
                if Metric.MSE_AOD in metrics:
                    err = mse([truth[0]], [estimate[0]])
                    out[(label, Metric.MSE_AOD)] = err * RAD2_TO_DEG2
                if Metric.MSE_AOA in metrics:
                    err = mse([truth[1]], [estimate[1]])
                    out[(label, Metric.MSE_AOA)] = err * RAD2_TO_DEG2
    return out


# ---------------------------------------------------------------------------
# Full sweep
# ---------------------------------------------------------------------------


@dataclass
class _Cell:
    point: int
    trial: int
    values: TrialValues | None = None
    error: Exception | None = None
    runtime: float = 0.0


def _run_cell(
    config: ScenarioConfig, spec: SweepSpec, point: int, trial: int, dt_redraws: int | None
) -> _Cell:
    start = time.perf_counter()
    cell = _Cell(point=point, trial=trial)
    try:
        cell.values = evaluate_trial(config, spec, cell_rng(config.seed, point, trial), dt_redraws)
    except DiscoIsacError as e:
        cell.error = e
    cell.runtime = time.perf_counter() - start
    return cell


def _label_order(spec: SweepSpec) -> list[str]:
    labels: list[str] = []
    for waveform in spec.waveforms:
        if waveform is Benchmark.COMM_WAVEFORM:
            labels.append(benchmark_label(waveform))
        else:
            labels.extend(benchmark_label(waveform, v) for v in spec.variants)
    return labels


def _aggregate(value: float, spec: SweepSpec, cells: list[_Cell]) -> list[SweepRecord]:
    records: list[SweepRecord] = []
    for label in _label_order(spec):
        for metric in spec.metrics:
            key = (label, metric)
            samples = [c.values[key] for c in cells if c.values is not None and key in c.values]
            if not samples:
                continue
            arr = np.asarray(samples)
            n = arr.size
            stderr = float(arr.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
            records.append(
                SweepRecord(
                    axis=value,
                    benchmark=label,
                    metric=metric,
                    mean=float(arr.mean()),
                    stderr=stderr,
                    trials=n,
                )
            )
    return records


def run_sweep(
    config: ScenarioConfig,
    spec: SweepSpec,
    threads: int | None = None,
    dt_redraws: int | None = None,
) -> SweepResult:
    """Evaluate ``spec`` on ``config``; deterministic given (config.seed, spec)."""
    result = SweepResult()
    configs: dict[int, ScenarioConfig] = {}
    for i, value in enumerate(spec.values):
        try:
            configs[i] = point_config(config, spec.axis, value)
        except ConfigError as e:
            logger.warning("Skipping %s=%s: %s", spec.axis.value, value, e)
            result.errors.append(PointError(axis=value, error_type="ConfigError", message=str(e)))

    workers = threads or settings.harness.threads or os.cpu_count() or 1
    jobs = [(i, t) for i in configs for t in range(spec.trials)]
    logger.info(
        "Sweeping %s over %d points x %d trials on %d workers",
        spec.axis.value,
        len(configs),
        spec.trials,
        workers,
    )
    with ThreadPoolExecutor(max_workers=workers) as pool:
        cells = list(
            pool.map(
                lambda job: _run_cell(configs[job[0]], spec, job[0], job[1], dt_redraws), jobs
            )
        )

    by_point: dict[int, list[_Cell]] = {i: [] for i in configs}
    for cell in cells:
        by_point[cell.point].append(cell)

    for i, value in enumerate(spec.values):
        if i not in by_point:
            continue
        point_cells = sorted(by_point[i], key=lambda c: c.trial)
        result.point_runtimes[repr(value)] = float(sum(c.runtime for c in point_cells))
        failed = [c for c in point_cells if c.error is not None]
        if failed:
            err = failed[0].error
            logger.warning(
                "Point %s=%s failed in %d/%d trials: %s",
                spec.axis.value,
                value,
                len(failed),
                len(point_cells),
                err,
            )
            result.errors.append(
                PointError(axis=value, error_type=type(err).__name__, message=str(err))
            )
            continue
        result.records.extend(_aggregate(value, spec, point_cells))
        logger.info("Finished %s=%s", spec.axis.value, value)
    return result
