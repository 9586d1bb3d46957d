"""Control-field constructors on the uniform, endpoint-inclusive grid over [-T, T]."""

from __future__ import annotations

import logging

import numpy as np

from quenchopt.models import ENDPOINT_TOL, G_FINAL, G_INITIAL, PowerParams, Pulse, PulseFamily
from quenchopt.services.chain import build_chain

logger = logging.getLogger(__name__)

DEFAULT_N_STEPS = 10_000


def _time_grid(T: float, n_steps: int) -> np.ndarray:
    if not T > 0:
        raise ValueError(f"half-duration T must be positive, got T={T!r}")
    if int(n_steps) != n_steps or n_steps < 2:
        raise ValueError(f"n_steps must be an integer >= 2, got {n_steps!r}")
    return np.linspace(-T, T, int(n_steps))


def _freeze(T: float, samples: np.ndarray, provenance: str) -> Pulse:
    samples = np.array(samples, dtype=float)
    if samples.ndim != 1 or len(samples) < 2:
        raise ValueError("pulse samples must be a 1-D array with at least 2 entries")
    if not np.all(np.isfinite(samples)):
        raise ValueError("pulse samples must be finite")
    if abs(samples[0] - G_INITIAL) > ENDPOINT_TOL or abs(samples[-1] - G_FINAL) > ENDPOINT_TOL:
        raise ValueError(
            f"pulse endpoints must be g(-T)={G_INITIAL} and g(T)={G_FINAL}, "
            f"got {samples[0]!r} and {samples[-1]!r}"
        )
    samples[0], samples[-1] = G_INITIAL, G_FINAL
    samples.setflags(write=False)
    return Pulse(T=float(T), samples=samples, provenance=provenance)


def power_pulse(r: float, T: float, n_steps: int = DEFAULT_N_STEPS) -> Pulse:
    """g(r, t) = 1 - |t/T|^r sgn(t)."""
    params = PowerParams(r)
    x = _time_grid(T, n_steps) / T
    samples = 1.0 - np.abs(x) ** params.r * np.sign(x)
    return _freeze(T, samples, f"{PulseFamily.POWER.value}(r={params.r!r})")


def linear_pulse(T: float, n_steps: int = DEFAULT_N_STEPS) -> Pulse:
    t = _time_grid(T, n_steps)
    return _freeze(T, 1.0 - t / T, PulseFamily.LINEAR.value)


def local_adiabatic_pulse(T: float, n_spins: int, n_steps: int = DEFAULT_N_STEPS) -> Pulse:
    """Schedule with a constant adiabaticity parameter for the slowest mode k_N.

    arctan((g + cos k_N)/sin k_N) is interpolated linearly in t between its
    values at g = 2 and g = 0.
    """
    k_n = build_chain(n_spins).slowest_momentum
    s, c = np.sin(k_n), np.cos(k_n)
    start = np.arctan((G_INITIAL + c) / s)
    stop = np.arctan((G_FINAL + c) / s)
    x = _time_grid(T, n_steps) / T
    angle = 0.5 * ((1.0 - x) * start + (1.0 + x) * stop)
    samples = s * np.tan(angle) - c
    return _freeze(T, samples, f"{PulseFamily.LOCAL_ADIABATIC.value}(N={n_spins})")


def tabulated_pulse(samples: np.ndarray, T: float, provenance: str = PulseFamily.TABULATED.value) -> Pulse:
    _time_grid(T, len(samples))
    return _freeze(T, samples, provenance)


def with_samples(pulse: Pulse, samples: np.ndarray, provenance: str | None = None) -> Pulse:
    """Same grid, new interior; used by the free-form optimizer and noise studies."""
    return _freeze(pulse.T, samples, provenance or pulse.provenance)


def make_pulse(family: str, *, T: float, n_steps: int, r: float | None = None, n_spins: int | None = None) -> Pulse:
    """Constructor dispatch by family name, as used by experiment configs."""
    try:
        kind = PulseFamily(family)
    except ValueError:
        raise ValueError(f"unknown pulse family {family!r}") from None
    if kind is PulseFamily.POWER:
        if r is None:
            raise ValueError("power pulse requires r")
        return power_pulse(r, T, n_steps)
    if kind is PulseFamily.LINEAR:
        return linear_pulse(T, n_steps)
    if kind is PulseFamily.LOCAL_ADIABATIC:
        if n_spins is None:
            raise ValueError("local adiabatic pulse requires N")
        return local_adiabatic_pulse(T, n_spins, n_steps)
    raise ValueError("tabulated pulses are loaded from a pulse file, not constructed by name")
