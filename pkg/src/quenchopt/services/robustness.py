"""Defect density under pulse noise, misprepared initial states and wrong chain length."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import stats

from quenchopt.models import (
    ChainConfig,
    NoisePoint,
    NoiseStudyConfig,
    Pulse,
    RobustnessResult,
    SpinCountPoint,
)
from quenchopt.services.chain import MIN_SPINS, build_chain
from quenchopt.services.propagate import defect_count, defect_density

logger = logging.getLogger(__name__)


def realization_rng(seed: int, delta_index: int, realization: int) -> np.random.Generator:
    """Independent stream per (seed, delta index, realization); draws are indexed by time point."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(delta_index, realization)))


def noisy_samples(pulse: Pulse, delta: float, rng: np.random.Generator) -> np.ndarray:
    """Interior samples shifted by independent Uniform[-delta/2, delta/2] draws."""
    samples = np.array(pulse.samples)
    noise = rng.uniform(-0.5, 0.5, size=pulse.n_steps - 2)
    samples[1:-1] += delta * noise
    return samples


def confidence_halfwidth(values: np.ndarray, confidence: float = 0.95) -> float:
    """Normal-approximation half-width z * s / sqrt(n); zero for n < 2."""
    n = len(values)
    if n < 2:
        return 0.0
    z = stats.norm.ppf(0.5 + confidence / 2.0)
    return float(z * np.std(values, ddof=1) / math.sqrt(n))


def _summarise(delta: float, values: np.ndarray, cfg: NoiseStudyConfig) -> NoisePoint:
    if np.all(values == values[0]):
        mean, half = float(values[0]), 0.0
    else:
        mean, half = float(np.mean(values)), confidence_halfwidth(values, cfg.confidence)
    return NoisePoint(
        delta=float(delta),
        mean_density=mean,
        ci_halfwidth=half,
        n=len(values),
        values=tuple(float(v) for v in values) if cfg.keep_values else (),
    )


def dynamical_noise_study(cfg: NoiseStudyConfig, *, workers: int = 1) -> RobustnessResult:
    chain = build_chain(cfg.n_spins)
    pulse = cfg.base_pulse

    def realization(job: tuple[int, float, int]) -> float:
        d_idx, delta, rep = job
        samples = noisy_samples(pulse, delta, realization_rng(cfg.rng_seed, d_idx, rep))
        return defect_count(pulse, chain, samples=samples) / chain.n_spins

    result = RobustnessResult()
    for d_idx, delta in enumerate(cfg.delta_grid):
        jobs = [(d_idx, float(delta), rep) for rep in range(cfg.n_realizations)]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                values = np.array(list(pool.map(realization, jobs)))
        else:
            values = np.array([realization(job) for job in jobs])
        point = _summarise(delta, values, cfg)
        result.per_delta.append(point)
        logger.info("noise delta=%.4g: mean rho=%.4e +- %.2e (n=%d)", point.delta, point.mean_density,
                    point.ci_halfwidth, point.n)
    return result


def initial_state_error(pulse: Pulse, chain: ChainConfig, delta: float) -> float:
    """rho when every mode starts in the ground state at g_i + delta instead of g_i."""
    g_start = pulse.g_initial + delta
    if g_start < 0:
        raise ValueError(f"g_i + delta must be >= 0, got {g_start!r}")
    return defect_density(pulse, chain, g_initial=g_start, keep_states=False).density


def round_even(x: float) -> int:
    """Nearest even integer, ties toward +inf."""
    return 2 * math.floor(x / 2.0 + 0.5)


def spin_count_error(pulse: Pulse, chain: ChainConfig, delta: float) -> SpinCountPoint:
    """Same pulse applied to chains of round_even(N(1 +- delta)) spins."""
    n_plus = round_even(chain.n_spins * (1.0 + delta))
    n_minus = round_even(chain.n_spins * (1.0 - delta))
    if min(n_plus, n_minus) < MIN_SPINS:
        raise ValueError(f"spin-count error delta={delta!r} shrinks N={chain.n_spins} below {MIN_SPINS}")
    plus = defect_density(pulse, build_chain(n_plus), keep_states=False).density
    minus = defect_density(pulse, build_chain(n_minus), keep_states=False).density
    return SpinCountPoint(delta=float(delta), n_plus=n_plus, n_minus=n_minus, density_plus=plus, density_minus=minus)
