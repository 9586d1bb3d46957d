"""Experiment files: flat INI sections parsed into frozen per-command configs.

One `[section]` per subcommand, `key = value` pairs, comma-separated lists.
Keys missing from the file keep their defaults; unknown keys are an error.

    [sweep]
    n_spins = 24, 50, 100
    tau = 0.05, 0.1, 0.13, 0.15, 0.17, 0.2, 0.3, 0.5
    initial_r = 0.5, 1, 2, 4, 8, 16
"""

from __future__ import annotations

import configparser
import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, TypeVar

logger = logging.getLogger(__name__)

C = TypeVar("C")


# ── Value parsers ─────────────────────────────────────────────────────────────

def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(item) for item in raw.split(",") if item.strip())


def _ints(raw: str) -> tuple[int, ...]:
    return tuple(int(item) for item in raw.split(",") if item.strip())


def _optional_float(raw: str) -> float | None:
    return None if raw.strip().lower() in ("", "none") else float(raw)


def _optional_int(raw: str) -> int | None:
    return None if raw.strip().lower() in ("", "none") else int(raw)


def _bool(raw: str) -> bool:
    value = raw.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _str(raw: str) -> str:
    return raw.strip()


# ── Command configs ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class SimulateConfig:
    n_spins: int = 100
    T: float = 17.8
    pulse: str = "linear"           # power | linear | local_adiabatic | file
    r: float | None = None
    pulse_path: str = ""
    gradient: bool = False
    gradient_method: str = "exact"
    n_steps: int | None = None


@dataclass(frozen=True)
class SweepConfig:
    n_spins: tuple[int, ...] = (24, 50, 100)
    tau: tuple[float, ...] = (0.05, 0.08, 0.1, 0.12, 0.13, 0.14, 0.15, 0.16, 0.17, 0.2, 0.25, 0.35, 0.5)
    initial_r: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0)
    max_iters: int = 200
    step_size: float = 1.0
    grad_tol: float | None = None
    drop_factor: float = 10.0
    tau_c_rule: str = "r_jump"      # r_jump | drop
    n_steps: int | None = None


@dataclass(frozen=True)
class LandscapeConfig:
    n_spins: int = 50
    tau: tuple[float, ...] = (0.1, 0.14, 0.25)
    r_min: float = 0.1
    r_max: float = 40.0
    n_r: int = 400
    log_spacing: bool = True
    n_steps: int | None = None


@dataclass(frozen=True)
class QslConfig:
    n_spins: tuple[int, ...] = (24, 50, 100)
    g_i: float = 2.0
    g_f: float = 0.0


@dataclass(frozen=True)
class RobustnessConfig:
    n_spins: int = 100
    T: float = 17.8
    pulse: str = "power"
    r: float | None = None          # power pulse without r: optimise r first
    pulse_path: str = ""
    initial_r: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0)
    max_iters: int = 200
    delta: tuple[float, ...] = (0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15)
    n_realizations: int = 500
    confidence: float = 0.95
    studies: tuple[str, ...] = ("noise", "initial_state", "spin_count")
    seed: int | None = None
    n_steps: int | None = None


@dataclass(frozen=True)
class FreeOptimizeConfig:
    n_spins: int = 24
    T: float = 4.0
    pulse: str = "linear"
    r: float | None = None
    pulse_path: str = ""
    step_size: float = 1.0
    max_iters: int = 500
    grad_tol: float | None = None
    smoothness: float = 0.0
    n_steps: int | None = None


_PARSERS: dict[type, dict[str, Callable[[str], Any]]] = {
    SimulateConfig: {
        "n_spins": int, "T": float, "pulse": _str, "r": _optional_float, "pulse_path": _str,
        "gradient": _bool, "gradient_method": _str, "n_steps": _optional_int,
    },
    SweepConfig: {
        "n_spins": _ints, "tau": _floats, "initial_r": _floats, "max_iters": int, "step_size": float,
        "grad_tol": _optional_float, "drop_factor": float, "tau_c_rule": _str, "n_steps": _optional_int,
    },
    LandscapeConfig: {
        "n_spins": int, "tau": _floats, "r_min": float, "r_max": float, "n_r": int, "log_spacing": _bool,
        "n_steps": _optional_int,
    },
    QslConfig: {"n_spins": _ints, "g_i": float, "g_f": float},
    RobustnessConfig: {
        "n_spins": int, "T": float, "pulse": _str, "r": _optional_float, "pulse_path": _str,
        "initial_r": _floats, "max_iters": int, "delta": _floats, "n_realizations": int,
        "confidence": float, "studies": lambda raw: tuple(s.strip() for s in raw.split(",") if s.strip()),
        "seed": _optional_int, "n_steps": _optional_int,
    },
    FreeOptimizeConfig: {
        "n_spins": int, "T": float, "pulse": _str, "r": _optional_float, "pulse_path": _str,
        "step_size": float, "max_iters": int, "grad_tol": _optional_float, "smoothness": float,
        "n_steps": _optional_int,
    },
}

ROBUSTNESS_STUDIES = ("noise", "initial_state", "spin_count")


def load_experiment(cls: type[C], path: Path | None, section: str) -> C:
    """Build `cls` from `[section]` of the INI file at `path` (defaults when path is None)."""
    if path is None:
        return cls()
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str    # keys are case-sensitive (T vs t)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ValueError(f"cannot read experiment file {path}: {exc}") from exc
    if not parser.has_section(section):
        logger.info("%s has no [%s] section, using defaults", path, section)
        return cls()

    schema = _PARSERS[cls]
    values: dict[str, Any] = {}
    for key, raw in parser.items(section):
        if key not in schema:
            raise ValueError(f"unknown key {key!r} in [{section}] of {path}; expected one of {sorted(schema)}")
        try:
            values[key] = schema[key](raw)
        except ValueError as exc:
            raise ValueError(f"bad value for {key!r} in [{section}] of {path}: {raw!r} ({exc})") from None
    return cls(**values)


def with_overrides(cfg: C, **overrides: Any) -> C:
    """Apply command-line overrides, ignoring those left unset (None) or unknown to `cfg`."""
    names = {f.name for f in dataclasses.fields(cfg)}
    changes = {k: v for k, v in overrides.items() if v is not None and k in names}
    return dataclasses.replace(cfg, **changes) if changes else cfg


def echo(cfg: Any) -> dict:
    """Config as a JSON-ready dict for run manifests."""
    return {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(cfg).items()}


def _render(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_render(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def dump_experiment(cfg: Any, section: str) -> str:
    """INI text that load_experiment turns back into an equal config."""
    lines = [f"[{section}]"]
    lines.extend(f"{f.name} = {_render(getattr(cfg, f.name))}" for f in dataclasses.fields(cfg))
    return "\n".join(lines) + "\n"
