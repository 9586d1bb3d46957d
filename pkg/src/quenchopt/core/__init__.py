"""Core utilities: settings, experiment files, result output."""

from quenchopt.core.config import Settings, get_settings
from quenchopt.core.experiment import load_experiment, with_overrides
from quenchopt.core.io import OutputDir, load_pulse, save_pulse

__all__ = [
    "Settings",
    "get_settings",
    "load_experiment",
    "with_overrides",
    "OutputDir",
    "load_pulse",
    "save_pulse",
]
