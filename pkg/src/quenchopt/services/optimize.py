"""Defect minimisation: power-law gradient flow, free-form descent, landscape scans."""

from __future__ import annotations

import hashlib
import logging
import threading
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from cachetools import LRUCache

from quenchopt.models import ChainConfig, Iterate, LandscapeScan, OptimizationTrace, OptimizerConfig, Pulse
from quenchopt.services.gradient import chain_rule_slope, defect_gradient, power_direction
from quenchopt.services.propagate import defect_count
from quenchopt.services.pulses import DEFAULT_N_STEPS, power_pulse, with_samples

logger = logging.getLogger(__name__)

_OBJECTIVE_CACHE_SIZE = 4096


def pulse_checksum(pulse: Pulse) -> str:
    return hashlib.sha1(np.ascontiguousarray(pulse.samples).tobytes()).hexdigest()[:12]


class PowerObjective:
    """D(r) for power-law pulses on a fixed (chain, T, n_steps), memoised per exponent.

    Shared by optimize_power and landscape_scan so both evaluate D(r) through
    the same path.
    """

    def __init__(self, chain: ChainConfig, T: float, n_steps: int = DEFAULT_N_STEPS, workers: int = 1) -> None:
        self.chain = chain
        self.T = T
        self.n_steps = n_steps
        self.workers = workers
        self._cache: LRUCache = LRUCache(maxsize=_OBJECTIVE_CACHE_SIZE)
        self._lock = threading.Lock()

    def pulse(self, r: float) -> Pulse:
        return power_pulse(r, self.T, self.n_steps)

    def __call__(self, r: float) -> float:
        key = float(r)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = defect_count(self.pulse(key), self.chain, workers=self.workers)
        with self._lock:
            self._cache[key] = value
        return value

    def slope(self, r: float) -> float:
        """dD/dr by the chain rule through the functional gradient."""
        pulse = self.pulse(r)
        grad = defect_gradient(pulse, self.chain, workers=self.workers)
        return chain_rule_slope(grad, power_direction(r, self.T, self.n_steps), pulse.dt)


# ── Power-law flow ────────────────────────────────────────────────────────────

def optimize_power(
    chain: ChainConfig,
    T: float,
    cfg: OptimizerConfig,
    *,
    n_steps: int = DEFAULT_N_STEPS,
    objective: PowerObjective | None = None,
) -> OptimizationTrace:
    """Integrate dr/ds = -dD/dr with explicit steps and backtracking.

    A step is accepted only when D strictly decreases; rejected steps halve,
    accepted steps let the next trial grow by cfg.step_growth.
    """
    objective = objective or PowerObjective(chain, T, n_steps)
    tol = cfg.tolerance_for(chain.n_spins)
    lo, hi = cfg.r_bounds

    r = cfg.initial_r
    D = objective(r)
    slope = objective.slope(r)
    s = 0.0
    step = cfg.step_size
    trace = OptimizationTrace(hit_bound=r in (lo, hi))
    trace.iterates.append(Iterate(s=s, r=r, checksum=None, defects=D, slope=slope * slope))

    for it in range(cfg.max_iters):
        if abs(slope) <= tol:
            trace.converged, trace.stop_reason = True, "gradient below tolerance"
            break
        velocity = -slope
        accepted = False
        while step * abs(velocity) >= cfg.min_step * max(1.0, abs(r)):
            candidate = r + step * velocity
            clamped = min(max(candidate, lo), hi)
            if clamped == r:
                break
            D_new = objective(clamped)
            if D_new < D:
                if clamped != candidate:
                    trace.hit_bound = True
                    logger.warning("r flow hit bound: %.6g clamped to %.6g (N=%d, T=%.4g)",
                                   candidate, clamped, chain.n_spins, T)
                s += step
                r, D = clamped, D_new
                accepted = True
                break
            step *= 0.5
            logger.debug("iter %d: D would rise (%.6e >= %.6e), step -> %.3e", it, D_new, D, step)
        if not accepted:
            trace.stop_reason = "r pinned at bound" if r in (lo, hi) else "line search stalled"
            break
        slope = objective.slope(r)
        trace.iterates.append(Iterate(s=s, r=r, checksum=None, defects=D, slope=slope * slope))
        logger.debug("iter %d: r=%.6f D=%.6e dD/dr=%.3e", it, r, D, slope)
        step *= cfg.step_growth
    else:
        if abs(slope) <= tol:
            trace.converged, trace.stop_reason = True, "gradient below tolerance"
        else:
            trace.stop_reason = "max_iters reached"

    trace.final_r = r
    trace.final_D = D
    trace.final_pulse = objective.pulse(r)
    _log_outcome("power flow", chain, T, trace)
    return trace


# ── Free-form descent ─────────────────────────────────────────────────────────

def _penalty(samples: np.ndarray, weight: float, dt: float) -> tuple[float, np.ndarray]:
    """weight * sum (g_{i+1} - g_i)^2 / dt and its gradient density."""
    if weight == 0.0:
        return 0.0, np.zeros_like(samples)
    diff = np.diff(samples)
    value = weight * float(np.dot(diff, diff)) / dt
    grad = np.zeros_like(samples)
    grad[:-1] -= 2.0 * weight * diff / dt
    grad[1:] += 2.0 * weight * diff / dt
    return value, grad / dt


def optimize_free(chain: ChainConfig, pulse0: Pulse, cfg: OptimizerConfig) -> OptimizationTrace:
    """Gradient descent on the interior samples, endpoints frozen at g_i and g_f."""
    tol = cfg.tolerance_for(chain.n_spins)
    pulse = pulse0
    dt = pulse.dt

    def objective(p: Pulse) -> tuple[float, float]:
        D = defect_count(p, chain)
        return D, D + _penalty(p.samples, cfg.smoothness, dt)[0]

    def direction(p: Pulse) -> np.ndarray:
        grad = defect_gradient(p, chain).values + _penalty(p.samples, cfg.smoothness, dt)[1]
        grad[0] = grad[-1] = 0.0
        return grad

    D, J = objective(pulse)
    grad = direction(pulse)
    s = 0.0
    step = cfg.step_size
    trace = OptimizationTrace()
    trace.iterates.append(Iterate(s=s, r=None, checksum=pulse_checksum(pulse), defects=D,
                                  slope=float(np.dot(grad, grad) * dt)))

    for it in range(cfg.max_iters):
        gmax = float(np.max(np.abs(grad)))
        if gmax <= tol:
            trace.converged, trace.stop_reason = True, "gradient below tolerance"
            break
        accepted = False
        while step * gmax >= cfg.min_step:
            candidate = with_samples(pulse, pulse.samples - step * grad, f"free({pulse0.provenance})")
            D_new, J_new = objective(candidate)
            if J_new < J:
                s += step
                pulse, D, J = candidate, D_new, J_new
                accepted = True
                break
            step *= 0.5
        if not accepted:
            trace.stop_reason = "line search stalled"
            break
        grad = direction(pulse)
        trace.iterates.append(Iterate(s=s, r=None, checksum=pulse_checksum(pulse), defects=D,
                                      slope=float(np.dot(grad, grad) * dt)))
        logger.debug("free iter %d: D=%.6e max|grad|=%.3e", it, D, float(np.max(np.abs(grad))))
        step *= cfg.step_growth
    else:
        if float(np.max(np.abs(grad))) <= tol:
            trace.converged, trace.stop_reason = True, "gradient below tolerance"
        else:
            trace.stop_reason = "max_iters reached"

    trace.final_pulse = pulse
    trace.final_D = D
    _log_outcome("free-form descent", chain, pulse.T, trace)
    return trace


def _log_outcome(label: str, chain: ChainConfig, T: float, trace: OptimizationTrace) -> None:
    if trace.converged:
        logger.info("%s N=%d T=%.4g converged after %d iterations: D=%.6e (%s)",
                    label, chain.n_spins, T, trace.n_iterations, trace.final_D, trace.stop_reason)
    else:
        logger.warning("%s N=%d T=%.4g did not converge after %d iterations: D=%.6e (%s)",
                       label, chain.n_spins, T, trace.n_iterations, trace.final_D, trace.stop_reason)


# ── Landscape ─────────────────────────────────────────────────────────────────

def local_minima(values: np.ndarray) -> tuple[int, ...]:
    """Interior indices strictly below both neighbours."""
    v = np.asarray(values)
    idx = np.nonzero((v[1:-1] < v[:-2]) & (v[1:-1] < v[2:]))[0] + 1
    return tuple(int(i) for i in idx)


def landscape_scan(
    chain: ChainConfig,
    T: float,
    r_grid: np.ndarray,
    *,
    n_steps: int = DEFAULT_N_STEPS,
    objective: PowerObjective | None = None,
    workers: int = 1,
) -> LandscapeScan:
    r_values = np.asarray(r_grid, dtype=float)
    if r_values.ndim != 1 or len(r_values) == 0:
        raise ValueError("r_grid must be a non-empty 1-D array")
    if np.any(r_values <= 0) or np.any(np.diff(r_values) <= 0):
        raise ValueError("r_grid must be positive and strictly increasing")
    objective = objective or PowerObjective(chain, T, n_steps)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            defects = np.array(list(pool.map(objective, r_values)))
    else:
        defects = np.array([objective(r) for r in r_values])
    minima = local_minima(defects)
    logger.info("landscape N=%d T=%.4g: %d points, %d local minima", chain.n_spins, T, len(r_values), len(minima))
    return LandscapeScan(r_values=r_values, defects=defects, minima=minima)
