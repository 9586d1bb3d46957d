"""Domain models: pure dataclasses, numpy arrays only, no I/O."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# Quench endpoints: paramagnet (g=2) to ferromagnet (g=0).
G_INITIAL = 2.0
G_FINAL = 0.0

ENDPOINT_TOL = 1e-12
NORM_TOL = 1e-10


class PulseFamily(str, Enum):
    POWER = "power"
    LINEAR = "linear"
    LOCAL_ADIABATIC = "local_adiabatic"
    TABULATED = "tabulated"


class PointStatus(str, Enum):
    OK = "ok"
    FAILED = "failed"


@dataclass(frozen=True)
class ChainConfig:
    n_spins: int
    momenta: np.ndarray = field(repr=False, compare=False)

    @property
    def n_modes(self) -> int:
        return len(self.momenta)

    @property
    def slowest_momentum(self) -> float:
        """k_N = pi - pi/N, the mode with the smallest gap at the critical point."""
        return float(self.momenta[-1])


@dataclass(frozen=True)
class ModeHamiltonian:
    k: float
    g: float
    gamma: float     # coefficient of sigma_z
    omega: float     # coefficient of sigma_x
    shift: float     # coefficient of the identity, -gamma

    @property
    def half_gap(self) -> float:
        """Lambda_k = sqrt(gamma^2 + omega^2); eigenvalues are shift -/+ Lambda_k."""
        return math.hypot(self.gamma, self.omega)

    @property
    def gap(self) -> float:
        return 2.0 * self.half_gap

    @property
    def eigenvalues(self) -> tuple[float, float]:
        return (self.shift - self.half_gap, self.shift + self.half_gap)

    def matrix(self) -> np.ndarray:
        # Traceless part enters with a minus sign so that the g -> +inf ground
        # state is (1, 0); see services.chain for the convention.
        return np.array(
            [
                [self.shift - self.gamma, -self.omega],
                [-self.omega, self.shift + self.gamma],
            ],
            dtype=complex,
        )


@dataclass(frozen=True)
class ModeState:
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(2)
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"ModeState must be unit norm, got |psi| = {norm!r}")
        object.__setattr__(self, "amplitudes", amps)

    def overlap(self, other: ModeState) -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class Pulse:
    T: float
    samples: np.ndarray = field(repr=False, compare=False)
    provenance: str = "tabulated"

    @property
    def n_steps(self) -> int:
        return len(self.samples)

    @property
    def dt(self) -> float:
        return 2.0 * self.T / (self.n_steps - 1)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(-self.T, self.T, self.n_steps)

    @property
    def g_initial(self) -> float:
        return float(self.samples[0])

    @property
    def g_final(self) -> float:
        return float(self.samples[-1])

    def midpoints(self) -> np.ndarray:
        """Field value used on each of the n_steps - 1 propagation steps."""
        return 0.5 * (self.samples[:-1] + self.samples[1:])


@dataclass(frozen=True)
class PowerParams:
    r: float

    def __post_init__(self) -> None:
        if not self.r > 0:
            raise ValueError(f"power-law exponent must be positive, got r={self.r!r}")


@dataclass
class QuenchResult:
    n_spins: int
    T: float
    provenance: str
    momenta: np.ndarray = field(repr=False)
    excitation: np.ndarray = field(repr=False)       # P_k per positive mode
    final_states: np.ndarray | None = field(default=None, repr=False)   # (modes, 2, 2), columns phi, phi_bar

    @property
    def per_mode(self) -> list[tuple[float, float]]:
        return [(float(k), float(p)) for k, p in zip(self.momenta, self.excitation)]

    @property
    def defects(self) -> float:
        """D = 2 * sum_k P_k, summed in fixed k order."""
        return 2.0 * math.fsum(float(p) for p in self.excitation)

    @property
    def density(self) -> float:
        return self.defects / self.n_spins

    @property
    def slowest_mode_share(self) -> float:
        total = self.defects
        if total <= 0.0:
            return 0.0
        return 2.0 * float(self.excitation[-1]) / total


@dataclass(frozen=True)
class GradientField:
    T: float
    values: np.ndarray = field(repr=False, compare=False)
    method: str = "exact"

    @property
    def n_steps(self) -> int:
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(-self.T, self.T, self.n_steps)

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1]


@dataclass(frozen=True)
class OptimizerConfig:
    initial_r: float = 1.0
    step_size: float = 1.0
    max_iters: int = 10_000
    grad_tol: float | None = None     # None -> 1e-10 * N at run time
    r_bounds: tuple[float, float] = (0.05, 200.0)
    step_growth: float = 2.0
    min_step: float = 1e-14
    smoothness: float = 0.0           # free-form quadratic-difference penalty weight

    def __post_init__(self) -> None:
        lo, hi = self.r_bounds
        if not self.step_size > 0:
            raise ValueError(f"step_size must be positive, got {self.step_size!r}")
        if self.grad_tol is not None and not self.grad_tol > 0:
            raise ValueError(f"grad_tol must be positive, got {self.grad_tol!r}")
        if not 0 < lo < hi:
            raise ValueError(f"r_bounds must satisfy 0 < lo < hi, got {self.r_bounds!r}")
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be >= 0, got {self.max_iters!r}")
        if not self.step_growth >= 1.0:
            raise ValueError(f"step_growth must be >= 1, got {self.step_growth!r}")
        if self.smoothness < 0:
            raise ValueError(f"smoothness must be >= 0, got {self.smoothness!r}")
        if not lo <= self.initial_r <= hi:
            raise ValueError(f"initial_r={self.initial_r!r} outside r_bounds {self.r_bounds!r}")

    def tolerance_for(self, n_spins: int) -> float:
        return self.grad_tol if self.grad_tol is not None else 1e-10 * n_spins


@dataclass(frozen=True)
class Iterate:
    s: float
    r: float | None        # None for free-form runs
    checksum: str | None   # free-form runs identify the pulse by checksum
    defects: float
    slope: float           # |dD/ds|


@dataclass
class OptimizationTrace:
    iterates: list[Iterate] = field(default_factory=list)
    converged: bool = False
    stop_reason: str = ""
    hit_bound: bool = False
    final_pulse: Pulse | None = None
    final_D: float = float("nan")
    final_r: float | None = None

    @property
    def n_iterations(self) -> int:
        return max(len(self.iterates) - 1, 0)

    @property
    def defect_sequence(self) -> list[float]:
        return [it.defects for it in self.iterates]


@dataclass(frozen=True)
class LandscapeScan:
    r_values: np.ndarray = field(repr=False)
    defects: np.ndarray = field(repr=False)
    minima: tuple[int, ...] = ()

    @property
    def points(self) -> list[tuple[float, float]]:
        return [(float(r), float(d)) for r, d in zip(self.r_values, self.defects)]


@dataclass(frozen=True)
class QslReport:
    n_spins: int
    momenta: np.ndarray = field(repr=False)
    times: np.ndarray = field(repr=False)         # T'_QSL(k) per mode
    slowest_mode_estimate: float = float("nan")   # Hegerfeldt T_QSL(k_N)
    monotone_from_slowest: bool = True

    @property
    def per_mode(self) -> list[tuple[float, float]]:
        return [(float(k), float(t)) for k, t in zip(self.momenta, self.times)]

    @property
    def tau_values(self) -> np.ndarray:
        return self.times / self.n_spins

    @property
    def slowest_mode_tau(self) -> float:
        return float(self.times[-1]) / self.n_spins


@dataclass(frozen=True)
class NoiseStudyConfig:
    base_pulse: Pulse
    n_spins: int
    delta_grid: tuple[float, ...]
    n_realizations: int = 500
    rng_seed: int = 12345
    keep_values: bool = False
    confidence: float = 0.95

    def __post_init__(self) -> None:
        if any(d < 0 for d in self.delta_grid):
            raise ValueError(f"noise strengths must be >= 0, got {self.delta_grid!r}")
        if self.n_realizations < 1:
            raise ValueError(f"n_realizations must be >= 1, got {self.n_realizations!r}")
        if not 0 < self.confidence < 1:
            raise ValueError(f"confidence must lie in (0, 1), got {self.confidence!r}")


@dataclass(frozen=True)
class NoisePoint:
    delta: float
    mean_density: float
    ci_halfwidth: float
    n: int
    values: tuple[float, ...] = ()


@dataclass
class RobustnessResult:
    per_delta: list[NoisePoint] = field(default_factory=list)


@dataclass(frozen=True)
class SpinCountPoint:
    delta: float
    n_plus: int
    n_minus: int
    density_plus: float
    density_minus: float

    @property
    def mean_density(self) -> float:
        return 0.5 * (self.density_plus + self.density_minus)


@dataclass
class SweepPoint:
    n_spins: int
    tau: float
    status: PointStatus = PointStatus.OK
    density_optimized: float = float("nan")
    density_linear: float = float("nan")
    density_local_adiabatic: float = float("nan")
    r_star: float = float("nan")
    starts: list[tuple[float, float, float]] = field(default_factory=list)  # (initial r, r*, rho)
    error: str = ""


@dataclass(frozen=True)
class TransitionWindow:
    """Adjacent tau pair bracketing tau_c on a sweep grid."""

    tau_low: float
    tau_high: float
    density_drop: float     # rho*(tau_low) / rho*(tau_high)
    r_star_jump: float      # r*(tau_high) / r*(tau_low)

    @property
    def tau_c(self) -> float:
        return 0.5 * (self.tau_low + self.tau_high)


@dataclass
class RunManifest:
    command: str
    config: dict
    seeds: dict[str, int]
    n_steps: int
    version: str
    started_at: str
    duration_seconds: float = 0.0
    outputs: list[str] = field(default_factory=list)
    succeeded: bool = False
