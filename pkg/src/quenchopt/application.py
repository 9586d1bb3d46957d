"""Command-line application factory."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from quenchopt.core.config import Settings
from quenchopt.handlers import (
    cmd_landscape,
    cmd_optimize_free,
    cmd_qsl,
    cmd_robustness,
    cmd_simulate,
    cmd_sweep,
)

logger = logging.getLogger(__name__)

COMMANDS = {
    "simulate": (cmd_simulate, "Evolve one pulse and write the per-mode excitation spectrum."),
    "sweep": (cmd_sweep, "Optimised vs linear vs local-adiabatic defect density over an (N, tau) grid."),
    "landscape": (cmd_landscape, "Scan D(r) over a grid of power-law exponents."),
    "qsl": (cmd_qsl, "Quantum speed limit per mode for a list of chain sizes."),
    "robustness": (cmd_robustness, "Defect density under pulse noise, state preparation and chain-length errors."),
    "optimize-free": (cmd_optimize_free, "Gradient descent on every pulse sample, endpoints fixed."),
}


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _step_count(raw: str) -> int:
    value = int(raw)
    if value < 2:
        raise argparse.ArgumentTypeError(f"need at least 2 time points, got {value}")
    return value


def create_application(settings: Settings) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quenchopt",
        description="Optimal transverse-field quenches of the Ising chain.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (handler, help_text) in COMMANDS.items():
        cmd = sub.add_parser(name, help=help_text, description=help_text)
        cmd.add_argument("--config", type=Path, default=None, help="experiment INI file")
        cmd.add_argument("--out", type=Path, default=None, help=f"output directory (default {settings.out_dir}/{name})")
        cmd.add_argument("--seed", type=int, default=None, help=f"RNG seed (default {settings.seed})")
        cmd.add_argument("--threads", type=_positive_int, default=None, help=f"worker threads (default {settings.threads})")
        cmd.add_argument("--n-steps", dest="n_steps", type=_step_count, default=None,
                         help=f"time points per pulse (default {settings.n_steps})")
        cmd.set_defaults(handler=handler)
    logger.debug("Application ready (%d subcommands).", len(COMMANDS))
    return parser
