"""Subcommand handlers: config -> pipeline -> files + manifest, returning the exit code."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Callable

import pytz

from quenchopt.core.config import Settings
from quenchopt.core.experiment import (
    FreeOptimizeConfig,
    LandscapeConfig,
    QslConfig,
    RobustnessConfig,
    SimulateConfig,
    SweepConfig,
    dump_experiment,
    echo,
    load_experiment,
    with_overrides,
)
from quenchopt.core.io import OutputDir
from quenchopt.formatters import (
    gradient_rows,
    initial_state_rows,
    landscape_rows,
    noise_rows,
    qsl_rows,
    quench_summary,
    r_star_rows,
    spectrum_rows,
    spin_count_rows,
    starts_rows,
    sweep_rows,
    tau_c_rows,
    trace_rows,
    trace_summary,
)
from quenchopt.models import PointStatus, RunManifest
from quenchopt.services.pipeline import ExperimentPipeline, transition_windows
from quenchopt.services.qsl import LARGE_N_TAU

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2

# Body of a command: fills the output directory, returns True iff every grid point succeeded.
CommandBody = Callable[[object, ExperimentPipeline, OutputDir, int], bool]


def _run(command: str, section: str, cls: type, args: argparse.Namespace, settings: Settings,
         body: CommandBody) -> int:
    started = datetime.now(tz=pytz.utc)
    clock = time.perf_counter()
    try:
        cfg = load_experiment(cls, args.config, section)
        cfg = with_overrides(cfg, n_steps=args.n_steps, seed=args.seed)
    except ValueError as exc:
        print(f"quenchopt {command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    field_names = {f.name for f in dataclasses.fields(cfg)}
    seed = getattr(cfg, "seed", None)
    if seed is None:
        seed = settings.seed
    n_steps = getattr(cfg, "n_steps", None) or settings.n_steps
    # config.ini holds the effective seed and n_steps
    cfg = dataclasses.replace(cfg, **{k: v for k, v in (("seed", seed), ("n_steps", n_steps)) if k in field_names})

    workers = args.threads or settings.threads
    out = OutputDir(args.out or settings.out_dir / command)
    out.write_text("config.ini", dump_experiment(cfg, section))
    pipeline = ExperimentPipeline(n_steps=n_steps, workers=workers)
    logger.info("Running %s (n_steps=%d, workers=%d) -> %s", command, n_steps, workers, out.path)

    exit_code = EXIT_OK
    try:
        all_ok = body(cfg, pipeline, out, seed)
    except ValueError as exc:
        logger.error("%s failed: %s", command, exc)
        print(f"quenchopt {command}: {exc}", file=sys.stderr)
        all_ok, exit_code = False, EXIT_CONFIG
    except Exception as exc:
        logger.exception("%s failed.", command)
        print(f"quenchopt {command}: {exc}", file=sys.stderr)
        all_ok, exit_code = False, EXIT_PARTIAL

    from quenchopt import __version__

    out.write_manifest(RunManifest(
        command=command,
        config=echo(cfg),
        seeds={"seed": seed},
        n_steps=n_steps,
        version=__version__,
        started_at=started.isoformat(),
        duration_seconds=round(time.perf_counter() - clock, 3),
        succeeded=all_ok,
    ))
    if exit_code != EXIT_OK:
        return exit_code
    if not all_ok:
        logger.warning("%s finished with failed grid points, see %s", command, out.path)
        return EXIT_PARTIAL
    logger.info("%s finished in %.1fs", command, time.perf_counter() - clock)
    return EXIT_OK


# ── Bodies ────────────────────────────────────────────────────────────────────

def _simulate(cfg: SimulateConfig, pipeline: ExperimentPipeline, out: OutputDir, seed: int) -> bool:
    pulse, result, gradient = pipeline.simulate(cfg)
    out.write_pulse("pulse.txt", pulse)
    out.write_csv("spectrum.csv", "spectrum", spectrum_rows(result))
    if gradient is not None:
        out.write_csv("gradient.csv", "gradient", gradient_rows(gradient))
    out.write_json("summary.json", quench_summary(result))
    return True


def _sweep(cfg: SweepConfig, pipeline: ExperimentPipeline, out: OutputDir, seed: int) -> bool:
    points = pipeline.sweep(cfg)
    windows = transition_windows(points, cfg.drop_factor, cfg.tau_c_rule)
    out.write_csv("sweep.csv", "sweep", sweep_rows(points))
    out.write_csv("r_star.csv", "r_star", r_star_rows(points))
    out.write_csv("starts.csv", "starts", starts_rows(points))
    out.write_csv("tau_c.csv", "tau_c", tau_c_rows(windows))
    failed = [p for p in points if p.status is PointStatus.FAILED]
    out.write_json("summary.json", {
        "points": len(points),
        "failed": [{"N": p.n_spins, "tau": p.tau, "error": p.error} for p in failed],
        "tau_c_rule": cfg.tau_c_rule,
        "tau_c": {str(n): [w.tau_low, w.tau_high] if w else None for n, w in windows.items()},
    })
    return not failed


def _landscape(cfg: LandscapeConfig, pipeline: ExperimentPipeline, out: OutputDir, seed: int) -> bool:
    summary = {}
    all_ok = True
    for tau, scan in pipeline.landscapes(cfg):
        if scan is None:
            all_ok = False
            summary[f"{tau:g}"] = None
            continue
        out.write_csv(f"landscape_tau{tau:g}.csv", "landscape", landscape_rows(scan))
        summary[f"{tau:g}"] = {"minima": len(scan.minima), "r_at_minima": [float(scan.r_values[i]) for i in scan.minima]}
    out.write_json("summary.json", {"N": cfg.n_spins, "scans": summary})
    return all_ok


def _qsl(cfg: QslConfig, pipeline: ExperimentPipeline, out: OutputDir, seed: int) -> bool:
    reports = pipeline.qsl(cfg)
    out.write_csv("qsl.csv", "qsl", [row for report in reports for row in qsl_rows(report)])
    out.write_json("summary.json", {
        "large_n_tau": LARGE_N_TAU,
        "chains": [
            {
                "N": r.n_spins,
                "tau_qsl_slowest": r.slowest_mode_tau,
                "tau_hegerfeldt": r.slowest_mode_estimate / r.n_spins,
                "monotone_from_slowest": r.monotone_from_slowest,
            }
            for r in reports
        ],
    })
    return True


def _robustness(cfg: RobustnessConfig, pipeline: ExperimentPipeline, out: OutputDir, seed: int) -> bool:
    report = pipeline.robustness(cfg, seed)
    out.write_pulse("base_pulse.txt", report.pulse)
    if report.noise is not None:
        out.write_csv("noise.csv", "noise", noise_rows(report.noise))
    if report.initial_state is not None:
        out.write_csv("initial_state.csv", "noise", initial_state_rows(report.initial_state))
    if report.spin_count is not None:
        out.write_csv("spin_count.csv", "spin_count", spin_count_rows(report.spin_count))
    out.write_json("summary.json", {
        "N": cfg.n_spins,
        "T": report.pulse.T,
        "pulse": report.pulse.provenance,
        "noiseless_rho": report.noiseless_density,
    })
    return True


def _optimize_free(cfg: FreeOptimizeConfig, pipeline: ExperimentPipeline, out: OutputDir, seed: int) -> bool:
    pulse0, trace = pipeline.optimize_free(cfg)
    out.write_pulse("initial_pulse.txt", pulse0)
    out.write_pulse("pulse.txt", trace.final_pulse)
    out.write_csv("trace.csv", "trace", trace_rows(trace))
    out.write_json("summary.json", trace_summary(trace, cfg.n_spins))
    return True


# ── Command handlers ──────────────────────────────────────────────────────────

def cmd_simulate(args: argparse.Namespace, settings: Settings) -> int:
    return _run("simulate", "simulate", SimulateConfig, args, settings, _simulate)


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    return _run("sweep", "sweep", SweepConfig, args, settings, _sweep)


def cmd_landscape(args: argparse.Namespace, settings: Settings) -> int:
    return _run("landscape", "landscape", LandscapeConfig, args, settings, _landscape)


def cmd_qsl(args: argparse.Namespace, settings: Settings) -> int:
    return _run("qsl", "qsl", QslConfig, args, settings, _qsl)


def cmd_robustness(args: argparse.Namespace, settings: Settings) -> int:
    return _run("robustness", "robustness", RobustnessConfig, args, settings, _robustness)


def cmd_optimize_free(args: argparse.Namespace, settings: Settings) -> int:
    return _run("optimize-free", "optimize-free", FreeOptimizeConfig, args, settings, _optimize_free)


__all__ = [
    "cmd_landscape",
    "cmd_optimize_free",
    "cmd_qsl",
    "cmd_robustness",
    "cmd_simulate",
    "cmd_sweep",
]
