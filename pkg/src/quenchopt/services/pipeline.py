"""Experiment pipeline: orchestrates pulse -> propagate -> optimise for each subcommand."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from quenchopt.core.experiment import (
    FreeOptimizeConfig,
    LandscapeConfig,
    QslConfig,
    RobustnessConfig,
    SimulateConfig,
    SweepConfig,
)
from quenchopt.core.io import load_pulse
from quenchopt.jobs import landscape_job, sweep_point_job
from quenchopt.models import (
    ChainConfig,
    GradientField,
    LandscapeScan,
    NoiseStudyConfig,
    OptimizationTrace,
    OptimizerConfig,
    PointStatus,
    Pulse,
    QslReport,
    QuenchResult,
    RobustnessResult,
    SpinCountPoint,
    SweepPoint,
    TransitionWindow,
)
from quenchopt.services.chain import build_chain
from quenchopt.services.gradient import defect_gradient
from quenchopt.services.optimize import PowerObjective, landscape_scan, optimize_free, optimize_power
from quenchopt.services.propagate import defect_density
from quenchopt.services.pulses import linear_pulse, local_adiabatic_pulse, make_pulse
from quenchopt.services.qsl import qsl_profile
from quenchopt.services.robustness import dynamical_noise_study, initial_state_error, spin_count_error

logger = logging.getLogger(__name__)

_PULSE_FILE = "file"


@dataclass
class MultiStart:
    best: OptimizationTrace
    starts: list[tuple[float, float, float]]   # (initial r, final r, rho)


@dataclass
class RobustnessReport:
    pulse: Pulse
    noiseless_density: float
    noise: RobustnessResult | None = None
    initial_state: list[tuple[float, float]] | None = None   # (delta, rho)
    spin_count: list[SpinCountPoint] | None = None


def _unpack(result: object, expected: type, label: str) -> tuple[object | None, bool]:
    if isinstance(result, expected):
        return result, True
    logger.error("%s raised: %s", label, result)
    return None, False


TAU_C_RULES = ("r_jump", "drop")


def _window(lo: SweepPoint, hi: SweepPoint) -> TransitionWindow:
    drop = lo.density_optimized / hi.density_optimized if hi.density_optimized > 0 else math.inf
    return TransitionWindow(tau_low=lo.tau, tau_high=hi.tau, density_drop=drop, r_star_jump=hi.r_star / lo.r_star)


def transition_windows(points: list[SweepPoint], drop_factor: float,
                       rule: str = "r_jump") -> dict[int, TransitionWindow | None]:
    """Per N: the adjacent tau interval bracketing tau_c.

    rule "r_jump": the pair across which r* rises the most (the optimum moves
    to the other basin of D(r)). rule "drop": the pair with the sharpest drop
    of optimised rho, if it reaches drop_factor.
    """
    if rule not in TAU_C_RULES:
        raise ValueError(f"unknown tau_c rule {rule!r}; expected one of {TAU_C_RULES}")
    windows: dict[int, TransitionWindow | None] = {}
    for n_spins in sorted({p.n_spins for p in points}):
        row = sorted((p for p in points if p.n_spins == n_spins and p.status is PointStatus.OK), key=lambda p: p.tau)
        pairs = [_window(lo, hi) for lo, hi in zip(row, row[1:]) if lo.density_optimized > 0 and lo.r_star > 0]
        if rule == "r_jump":
            candidates = [w for w in pairs if w.r_star_jump > 1.0]
            best = max(candidates, key=lambda w: w.r_star_jump, default=None)
        else:
            candidates = [w for w in pairs if w.density_drop >= drop_factor]
            best = max(candidates, key=lambda w: w.density_drop, default=None)
        windows[n_spins] = best
        if best is None:
            logger.warning("No tau_c window (%s rule) found for N=%d on the tau grid", rule, n_spins)
        else:
            logger.info("N=%d: tau_c in (%.4g, %.4g), rho drops %.3gx, r* jumps %.3gx", n_spins,
                        best.tau_low, best.tau_high, best.density_drop, best.r_star_jump)
    return windows


class ExperimentPipeline:
    def __init__(self, n_steps: int, workers: int = 1) -> None:
        self.n_steps = n_steps
        self.workers = workers

    def _steps(self, override: int | None) -> int:
        return override if override is not None else self.n_steps

    def resolve_pulse(self, family: str, *, T: float, n_spins: int, r: float | None, path: str,
                      n_steps: int) -> Pulse:
        if family == _PULSE_FILE:
            if not path:
                raise ValueError("pulse = file requires pulse_path")
            pulse = load_pulse(Path(path))
            if abs(pulse.T - T) > 1e-12 * max(1.0, T):
                logger.warning("Pulse file %s has T=%.6g, config says T=%.6g; using the file", path, pulse.T, T)
            return pulse
        return make_pulse(family, T=T, n_steps=n_steps, r=r, n_spins=n_spins)

    # ── simulate ──────────────────────────────────────────────────────────────

    def simulate(self, cfg: SimulateConfig) -> tuple[Pulse, QuenchResult, GradientField | None]:
        chain = build_chain(cfg.n_spins)
        pulse = self.resolve_pulse(cfg.pulse, T=cfg.T, n_spins=cfg.n_spins, r=cfg.r, path=cfg.pulse_path,
                                   n_steps=self._steps(cfg.n_steps))
        result = defect_density(pulse, chain, workers=self.workers)
        logger.info("simulate N=%d T=%.4g %s: D=%.6e rho=%.6e (k_N share %.3f)", chain.n_spins, pulse.T,
                    pulse.provenance, result.defects, result.density, result.slowest_mode_share)
        gradient = defect_gradient(pulse, chain, method=cfg.gradient_method, workers=self.workers) if cfg.gradient else None
        return pulse, result, gradient

    # ── sweep ─────────────────────────────────────────────────────────────────

    def best_power(self, chain: ChainConfig, T: float, initial_r: tuple[float, ...], *, max_iters: int,
                   step_size: float = 1.0, grad_tol: float | None = None, n_steps: int) -> MultiStart:
        """optimize_power from every initial r (one shared D(r) cache); keeps the lowest D."""
        if not initial_r:
            raise ValueError("at least one initial r is required")
        objective = PowerObjective(chain, T, n_steps)
        best: OptimizationTrace | None = None
        starts: list[tuple[float, float, float]] = []
        for r0 in initial_r:
            cfg = OptimizerConfig(initial_r=r0, step_size=step_size, max_iters=max_iters, grad_tol=grad_tol)
            trace = optimize_power(chain, T, cfg, n_steps=n_steps, objective=objective)
            starts.append((float(r0), float(trace.final_r), trace.final_D / chain.n_spins))
            if best is None or trace.final_D < best.final_D:
                best = trace
        return MultiStart(best=best, starts=starts)

    def sweep_point(self, n_spins: int, tau: float, cfg: SweepConfig) -> SweepPoint:
        chain = build_chain(n_spins)
        T = tau * n_spins
        n_steps = self._steps(cfg.n_steps)
        multi = self.best_power(chain, T, cfg.initial_r, max_iters=cfg.max_iters, step_size=cfg.step_size,
                                grad_tol=cfg.grad_tol, n_steps=n_steps)
        linear = defect_density(linear_pulse(T, n_steps), chain, keep_states=False)
        adiabatic = defect_density(local_adiabatic_pulse(T, n_spins, n_steps), chain, keep_states=False)
        return SweepPoint(
            n_spins=n_spins,
            tau=tau,
            density_optimized=multi.best.final_D / n_spins,
            density_linear=linear.density,
            density_local_adiabatic=adiabatic.density,
            r_star=float(multi.best.final_r),
            starts=multi.starts,
        )

    def sweep(self, cfg: SweepConfig) -> list[SweepPoint]:
        """Every (N, tau) grid point, in grid order; failed points are kept with status FAILED."""
        if cfg.tau_c_rule not in TAU_C_RULES:
            raise ValueError(f"unknown tau_c_rule {cfg.tau_c_rule!r}; expected one of {TAU_C_RULES}")
        grid = [(n, tau) for n in cfg.n_spins for tau in cfg.tau]
        logger.info("Sweep: %d grid points on %d worker(s)", len(grid), self.workers)
        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                results = list(pool.map(lambda job: sweep_point_job(self, job[0], job[1], cfg), grid))
        else:
            results = [sweep_point_job(self, n, tau, cfg) for n, tau in grid]

        points: list[SweepPoint] = []
        for (n, tau), result in zip(grid, results):
            point, ok = _unpack(result, SweepPoint, f"sweep N={n} tau={tau:g}")
            if not ok:
                point = SweepPoint(n_spins=n, tau=tau, status=PointStatus.FAILED, error=str(result))
            points.append(point)
        return points

    # ── landscape ─────────────────────────────────────────────────────────────

    def landscape(self, tau: float, cfg: LandscapeConfig) -> LandscapeScan:
        if not 0 < cfg.r_min < cfg.r_max or cfg.n_r < 3:
            raise ValueError(f"landscape needs 0 < r_min < r_max and n_r >= 3, got {cfg.r_min}, {cfg.r_max}, {cfg.n_r}")
        space = np.geomspace if cfg.log_spacing else np.linspace
        r_grid = space(cfg.r_min, cfg.r_max, cfg.n_r)
        chain = build_chain(cfg.n_spins)
        return landscape_scan(chain, tau * cfg.n_spins, r_grid, n_steps=self._steps(cfg.n_steps),
                              workers=self.workers)

    def landscapes(self, cfg: LandscapeConfig) -> list[tuple[float, LandscapeScan | None]]:
        out: list[tuple[float, LandscapeScan | None]] = []
        for tau in cfg.tau:
            scan, _ = _unpack(landscape_job(self, tau, cfg), LandscapeScan, f"landscape tau={tau:g}")
            out.append((tau, scan))
        return out

    # ── qsl ───────────────────────────────────────────────────────────────────

    def qsl(self, cfg: QslConfig) -> list[QslReport]:
        return [qsl_profile(build_chain(n), cfg.g_i, cfg.g_f) for n in cfg.n_spins]

    # ── robustness ────────────────────────────────────────────────────────────

    def robustness(self, cfg: RobustnessConfig, seed: int) -> RobustnessReport:
        unknown = set(cfg.studies) - {"noise", "initial_state", "spin_count"}
        if unknown:
            raise ValueError(f"unknown robustness studies {sorted(unknown)}")
        chain = build_chain(cfg.n_spins)
        n_steps = self._steps(cfg.n_steps)
        if cfg.pulse == "power" and cfg.r is None:
            multi = self.best_power(chain, cfg.T, cfg.initial_r, max_iters=cfg.max_iters, n_steps=n_steps)
            pulse = multi.best.final_pulse
            logger.info("Robustness base pulse: optimised r*=%.6g", multi.best.final_r)
        else:
            pulse = self.resolve_pulse(cfg.pulse, T=cfg.T, n_spins=cfg.n_spins, r=cfg.r, path=cfg.pulse_path,
                                       n_steps=n_steps)
        report = RobustnessReport(pulse=pulse, noiseless_density=defect_density(pulse, chain, keep_states=False).density)

        if "noise" in cfg.studies:
            study = NoiseStudyConfig(
                base_pulse=pulse,
                n_spins=cfg.n_spins,
                delta_grid=tuple(cfg.delta),
                n_realizations=cfg.n_realizations,
                rng_seed=seed,
                confidence=cfg.confidence,
            )
            report.noise = dynamical_noise_study(study, workers=self.workers)
        if "initial_state" in cfg.studies:
            report.initial_state = [(d, initial_state_error(pulse, chain, d)) for d in cfg.delta]
        if "spin_count" in cfg.studies:
            report.spin_count = [spin_count_error(pulse, chain, d) for d in cfg.delta]
        return report

    # ── free-form ─────────────────────────────────────────────────────────────

    def optimize_free(self, cfg: FreeOptimizeConfig) -> tuple[Pulse, OptimizationTrace]:
        chain = build_chain(cfg.n_spins)
        pulse0 = self.resolve_pulse(cfg.pulse, T=cfg.T, n_spins=cfg.n_spins, r=cfg.r, path=cfg.pulse_path,
                                    n_steps=self._steps(cfg.n_steps))
        opt = OptimizerConfig(step_size=cfg.step_size, max_iters=cfg.max_iters, grad_tol=cfg.grad_tol,
                              smoothness=cfg.smoothness)
        return pulse0, optimize_free(chain, pulse0, opt)
