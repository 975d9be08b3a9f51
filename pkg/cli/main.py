"""
disco-isac command line — sweeps, statistical validation and single-scenario CRLBs.

Usage:
    disco-isac sweep --config s.toml --axis power --from 0 --to 15 --step 1 \\
        --metric sum_rate --trials 200 --seed 7 --out fig2
    disco-isac sweep --replay fig2.manifest
    disco-isac validate --config s.toml [--samples 10000] [--out checks]
    disco-isac crlb --config s.toml [--kappa 0.2] [--no-dris] [--format csv]

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from collections.abc import Sequence
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import ValidationError

from analysis.sensing import SensingModel, sensing_report
from channel.assembly import assemble_channels
from channel.dris import dris_moments
from cli import __version__
from cli.output import (
    CRLB_COLUMNS,
    frame_to_csv,
    output_paths,
    read_manifest,
    sweep_frame,
    validation_frame,
    write_csv,
    write_manifest,
)
from cli.render import render_crlb_report, render_sweep_summary, render_validation_table
from config.loader import load_scenario, scenario_from_snapshot
from config.settings import settings
from harness.sweep import run_sweep
from harness.validation import validate_scenario
from schemas.errors import (
    ConfigError,
    DiscoIsacError,
    DomainError,
    InfeasibleConstraintError,
    NumericalError,
    UnidentifiableError,
)
from schemas.scenario import ScenarioConfig, watts_to_dbm
from schemas.sweep import (
    WAVEFORM_BENCHMARKS,
    Benchmark,
    Metric,
    RunManifest,
    SweepAxis,
    SweepSpec,
    benchmark_label,
)
from waveform.solver import design_waveforms
from waveform.symbols import direct_link_amplitude, generate_symbols

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4

AXIS_NAMES: dict[str, SweepAxis] = {
    "power": SweepAxis.POWER_DBM,
    "elements": SweepAxis.N_D,
    "distance": SweepAxis.DRIS_DISTANCE_M,
    **{axis.value: axis for axis in SweepAxis},
}


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------


def _csv_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def axis_values(
    values: str | None, start: float | None, stop: float | None, step: float | None
) -> tuple[float, ...]:
    """Explicit ``--values`` or an inclusive ``--from/--to/--step`` range."""
    if values is not None:
        if start is not None or stop is not None or step is not None:
            raise ConfigError("use either --values or --from/--to/--step, not both")
        try:
            return tuple(float(v) for v in _csv_list(values))
        except ValueError as e:
            raise ConfigError(f"--values: {e}") from e
    if start is None or stop is None or step is None:
        raise ConfigError("axis values need --values or all of --from, --to and --step")
    if step == 0.0 or (stop - start) * step < 0.0:
        raise ConfigError(f"--step {step!r} does not lead from {start!r} to {stop!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 12) for i in range(count))


def _metrics(items: Sequence[str] | None) -> tuple[Metric, ...]:
    names = [m for item in (items or ["sum_rate"]) for m in _csv_list(item)]
    try:
        return tuple(dict.fromkeys(Metric(name) for name in names))
    except ValueError as e:
        raise ConfigError(f"--metric: {e}") from e


def _benchmarks(text: str | None, no_dris: bool) -> tuple[Benchmark, ...]:
    chosen: list[Benchmark] = []
    try:
        if text:
            chosen = [Benchmark(name) for name in _csv_list(text)]
    except ValueError as e:
        raise ConfigError(f"--benchmarks: {e}") from e
    if not any(b in chosen for b in WAVEFORM_BENCHMARKS):
        chosen += list(WAVEFORM_BENCHMARKS)
    if no_dris:
        chosen = [b for b in chosen if b is not Benchmark.WITH_DRIS]
        chosen.append(Benchmark.WITHOUT_DRIS)
    return tuple(dict.fromkeys(chosen))


def _scenario(args: argparse.Namespace) -> ScenarioConfig:
    if not args.config:
        raise ConfigError("--config is required")
    config = load_scenario(args.config)
    if args.seed is not None:
        config = config.evolve(seed=args.seed)
    return config


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_sweep(args: argparse.Namespace) -> int:
    """Run a sweep (or replay a manifest) and write ``<out>.csv`` plus ``<out>.manifest``."""
    if args.replay:
        manifest = read_manifest(args.replay)
        config = scenario_from_snapshot(manifest.config, source=str(args.replay))
        spec = manifest.spec
        dt_redraws = manifest.dt_redraws or settings.harness.dt_redraws
        out = args.out or str(Path(args.replay).with_suffix(""))
        logger.info("Replaying %s", args.replay)
    else:
        config = _scenario(args)
        if not args.axis:
            raise ConfigError("--axis is required")
        if not args.out:
            raise ConfigError("--out is required")
        spec = SweepSpec(
            axis=AXIS_NAMES[args.axis],
            values=axis_values(args.values, args.start, args.stop, args.step),
            trials=args.trials or settings.harness.default_trials,
            metrics=_metrics(args.metric),
            benchmarks=_benchmarks(args.benchmarks, args.no_dris),
        )
        out = args.out
        dt_redraws = settings.harness.dt_redraws

    started_at = datetime.now(timezone.utc).isoformat()
    start = time.perf_counter()
    result = run_sweep(config, spec, threads=args.threads, dt_redraws=dt_redraws)
    wall_clock = time.perf_counter() - start

    csv_path, manifest_path = output_paths(out)
    write_csv(sweep_frame(result.records), csv_path)
    write_manifest(
        RunManifest(
            tool_version=__version__,
            config=config.model_dump(mode="json"),
            spec=spec,
            seed=config.seed,
            started_at=started_at,
            wall_clock_s=wall_clock,
            point_runtimes_s=result.point_runtimes,
            point_errors=result.errors,
            dt_redraws=dt_redraws,
            notes=[f"{spec.trials} Monte Carlo trials per point (desk-scale choice)"],
        ),
        manifest_path,
    )
    _emit(
        render_sweep_summary(
            axis=spec.axis.value,
            points=len(spec.values),
            trials=spec.trials,
            seed=config.seed,
            records=result.records,
            errors=result.errors,
            csv_path=str(csv_path),
            manifest_path=str(manifest_path),
            wall_clock_s=wall_clock,
        )
    )
    if result.errors and not args.keep_going:
        logger.error("%d sweep point(s) failed; use --keep-going to accept", len(result.errors))
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    """Proposition, moment and oracle checks; exit 0 iff no check fails."""
    config = _scenario(args)
    record = validate_scenario(
        config, samples=args.samples, rng=np.random.default_rng(config.seed)
    )
    frame = validation_frame(record)
    if args.format == "csv":
        _emit(frame_to_csv(frame))
    else:
        _emit(render_validation_table(record))
    if args.out:
        write_csv(frame, Path(f"{args.out}.csv"))
    if not record.passed:
        for check in record.failures:
            logger.error(
                "Check %s failed: observed %g, expected %g",
                check.name,
                check.observed,
                check.expected,
            )
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_crlb(args: argparse.Namespace) -> int:
    """FIM and CRLBs (deg^2) for one seeded realization, with and without the DRIS."""
    config = _scenario(args)
    kappa = config.kappa if args.kappa is None else args.kappa
    if not 0.0 <= kappa <= 1.0:
        raise ConfigError(f"--kappa must lie in [0, 1], got {kappa!r}")

    rng = np.random.default_rng(config.seed)
    channels = assemble_channels(config, rng)
    amplitude = config.symbol_amplitude or direct_link_amplitude(
        config.p0, config.n_b, channels.large_scale.l_d_c
    )
    frame = generate_symbols(config.k_c, config.frame_len, rng, amplitude=amplitude)
    moments = dris_moments(config.dris)
    direct_gain = float(np.mean(channels.large_scale.l_d_c))
    variants = [False] if args.no_dris else [True, False]

    rows = []
    for with_dris in variants:
        ch = channels if with_dris else channels.without_dris()
        _, w = design_waveforms(ch.h_pt, frame, config.p0, kappa, direct_gain)
        model = SensingModel.from_channels(ch, config.chi, config.sigma2_s, moments)
        report = sensing_report(channels.theta1, channels.theta2, w, model, with_dris)
        rows.append(
            {
                "label": benchmark_label(
                    Benchmark.ISAC_WAVEFORM,
                    Benchmark.WITH_DRIS if with_dris else Benchmark.WITHOUT_DRIS,
                ),
                "fim": report.fim.tolist(),
                "crlb_aod": report.crlb_deg2[0],
                "crlb_aoa": report.crlb_deg2[1],
            }
        )

    if args.format == "csv":
        frame_out = pd.DataFrame(
            [
                [r["label"], *np.ravel(r["fim"]).tolist(), r["crlb_aod"], r["crlb_aoa"]]
                for r in rows
            ],
            columns=CRLB_COLUMNS,
        )
        _emit(frame_to_csv(frame_out))
    else:
        _emit(
            render_crlb_report(
                seed=config.seed,
                kappa=kappa,
                p0_dbm=watts_to_dbm(config.p0),
                theta_deg=(math.degrees(channels.theta1), math.degrees(channels.theta2)),
                reports=rows,
            )
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="disco-isac",
        description="Bistatic ISAC under a disco RIS: sweeps, validation and CRLBs",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Override DISCO_ISAC_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Scenario TOML file")
    common.add_argument("--seed", type=int, default=None, help="Override the scenario seed")

    sweep = sub.add_parser("sweep", parents=[common], help="Monte Carlo sweep to CSV")
    sweep.add_argument("--axis", choices=sorted(AXIS_NAMES), help="Swept parameter")
    sweep.add_argument("--values", help="Comma-separated axis values")
    sweep.add_argument("--from", dest="start", type=float, help="First axis value")
    sweep.add_argument("--to", dest="stop", type=float, help="Last axis value (inclusive)")
    sweep.add_argument("--step", type=float, help="Axis increment")
    sweep.add_argument(
        "--metric", action="append", help="Metric(s), comma-separated or repeated"
    )
    sweep.add_argument("--benchmarks", help="Comma-separated benchmark set")
    sweep.add_argument("--no-dris", action="store_true", help="Only the no-DRIS variant")
    sweep.add_argument("--trials", type=int, default=None, help="Trials per point")
    sweep.add_argument("--threads", type=int, default=None, help="Worker threads")
    sweep.add_argument("--out", help="Output prefix for <out>.csv and <out>.manifest")
    sweep.add_argument("--keep-going", action="store_true", help="Exit 0 despite failed points")
    sweep.add_argument("--replay", help="Re-run the config and spec stored in a manifest")
    sweep.set_defaults(handler=cmd_sweep)

    validate = sub.add_parser("validate", parents=[common], help="Statistical validation")
    validate.add_argument("--samples", type=int, default=None, help="Monte Carlo samples")
    validate.add_argument("--format", choices=["table", "csv"], default="table")
    validate.add_argument("--out", help="Also write <out>.csv")
    validate.set_defaults(handler=cmd_validate)

    crlb = sub.add_parser("crlb", parents=[common], help="FIM and CRLBs for one realization")
    crlb.add_argument("--kappa", type=float, default=None, help="Trade-off factor")
    crlb.add_argument("--no-dris", action="store_true", help="Only the no-DRIS variant")
    crlb.add_argument("--format", choices=["table", "csv"], default="table")
    crlb.set_defaults(handler=cmd_crlb)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """CLI entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s [%(levelname)s] %(message)s",
    )

    try:
        return int(args.handler(args))
    except ConfigError as e:
        logger.error("%s", e)
        return EXIT_CONFIG
    except ValidationError as e:
        logger.error("invalid configuration: %s", e)
        return EXIT_CONFIG
    except DomainError as e:
        logger.error("invalid argument: %s", e)
        return EXIT_CONFIG
    except OSError as e:
        logger.error("I/O error: %s", e)
        return EXIT_IO
    except (NumericalError, UnidentifiableError, InfeasibleConstraintError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_NUMERICAL
    except DiscoIsacError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
