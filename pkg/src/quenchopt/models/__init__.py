"""Domain models: pure dataclasses, numpy arrays only."""

from quenchopt.models.domain import (
    ChainConfig,
    ENDPOINT_TOL,
    G_FINAL,
    G_INITIAL,
    GradientField,
    Iterate,
    LandscapeScan,
    ModeHamiltonian,
    ModeState,
    NORM_TOL,
    NoisePoint,
    NoiseStudyConfig,
    OptimizationTrace,
    OptimizerConfig,
    PointStatus,
    PowerParams,
    Pulse,
    PulseFamily,
    QslReport,
    QuenchResult,
    RobustnessResult,
    RunManifest,
    SpinCountPoint,
    SweepPoint,
    TransitionWindow,
)

__all__ = [
    "ChainConfig",
    "ENDPOINT_TOL",
    "G_FINAL",
    "G_INITIAL",
    "GradientField",
    "Iterate",
    "LandscapeScan",
    "ModeHamiltonian",
    "ModeState",
    "NORM_TOL",
    "NoisePoint",
    "NoiseStudyConfig",
    "OptimizationTrace",
    "OptimizerConfig",
    "PointStatus",
    "PowerParams",
    "Pulse",
    "PulseFamily",
    "QslReport",
    "QuenchResult",
    "RobustnessResult",
    "RunManifest",
    "SpinCountPoint",
    "SweepPoint",
    "TransitionWindow",
]
