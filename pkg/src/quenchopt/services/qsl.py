"""Speed-limit estimates per mode for the g: 2 -> 0 passage.

Fleming-type bound: with the Hamiltonian frozen at the critical field g = 1,
cos(2 dE_k T') = |<G_k(g_i)|G_k(g_f)>| where dE_k is the energy spread of
|G_k(g_i)>. Hegerfeldt estimate: for the slowest mode at large N,
2 omega_{k_N} T = -pi/2, i.e. T = pi / (8 sin(pi/N)).
"""

from __future__ import annotations

import logging

import numpy as np

from quenchopt.models import G_FINAL, G_INITIAL, ChainConfig, QslReport
from quenchopt.services.chain import ground_state, mode_hamiltonian

logger = logging.getLogger(__name__)

CRITICAL_FIELD = 1.0
LARGE_N_TAU = 1.0 / 8.0
_SPREAD_FLOOR = 1e-12


def state_spread(h: np.ndarray, psi: np.ndarray) -> float:
    mean = np.real(np.vdot(psi, h @ psi))
    # sqrt(<H^2> - <H>^2) evaluated as |(H - <H>) psi| to keep eigenstates at zero
    spread = float(np.linalg.norm(h @ psi - mean * psi))
    return 0.0 if spread <= _SPREAD_FLOOR * np.abs(h).max() else spread


def energy_variance(k: float, g_ref: float, g_state: float) -> float:
    """Energy spread of |G_k(g_state)> under the mode Hamiltonian at g_ref."""
    return state_spread(mode_hamiltonian(k, g_ref).matrix(), ground_state(k, g_state).amplitudes)


def fleming_qsl(
    k: float,
    g_i: float = G_INITIAL,
    g_f: float = G_FINAL,
    *,
    g_ref: float = CRITICAL_FIELD,
) -> float:
    """T'_QSL(k) = arccos|<G_k(g_i)|G_k(g_f)>| / (2 dE_k)."""
    if g_i == g_f:
        return 0.0
    overlap = abs(ground_state(k, g_i).overlap(ground_state(k, g_f)))
    if overlap >= 1.0:
        return 0.0
    spread = energy_variance(k, g_ref, g_i)
    if spread <= 0.0:
        raise ValueError(f"degenerate variance, bound undefined (k={k!r}, g_ref={g_ref!r}, g_i={g_i!r})")
    return float(np.arccos(min(overlap, 1.0)) / (2.0 * spread))


def hegerfeldt_qsl(chain: ChainConfig) -> float:
    """Large-N reduction of the two-level speed limit for mode k_N: pi / (4 |omega_{k_N}|)."""
    omega = mode_hamiltonian(chain.slowest_momentum, CRITICAL_FIELD).omega
    return float(np.pi / (4.0 * abs(omega)))


def qsl_profile(chain: ChainConfig, g_i: float = G_INITIAL, g_f: float = G_FINAL) -> QslReport:
    times = np.array([fleming_qsl(k, g_i, g_f) for k in chain.momenta])
    monotone = bool(np.all(np.diff(times) > 0))
    if not monotone:
        logger.warning("QSL profile for N=%d does not fall off monotonically away from k_N", chain.n_spins)
    if int(np.argmax(times)) != chain.n_modes - 1:
        logger.warning("QSL profile for N=%d peaks away from k_N", chain.n_spins)
    report = QslReport(
        n_spins=chain.n_spins,
        momenta=np.array(chain.momenta),
        times=times,
        slowest_mode_estimate=hegerfeldt_qsl(chain),
        monotone_from_slowest=monotone,
    )
    logger.info("QSL N=%d: T'(k_N)/N=%.4f, Hegerfeldt T/N=%.4f", chain.n_spins, report.slowest_mode_tau,
                report.slowest_mode_estimate / chain.n_spins)
    return report
