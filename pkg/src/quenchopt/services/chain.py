"""Ising chain in the even-parity sector: momentum grid, mode Hamiltonians, eigenstates.

After the Jordan-Wigner and Fourier maps each pair (k, -k) with
k = pi(2m - 1)/N, m = 1..N/2, is an independent two-level system on the basis
{|0_k>, c_k^dag c_-k^dag |0_k>}.

Basis convention: the mode matrix is shift*1 - (gamma*sigma_z + omega*sigma_x)
with gamma = 2(g + cos k), omega = -2 sin k and shift = -gamma. With this sign
the g -> +inf ground state is (1, 0) and the ground state is (cos theta, sin theta)
with tan 2theta = -sin k / (g + cos k).
"""

from __future__ import annotations

import numpy as np

from quenchopt.models import ChainConfig, ModeHamiltonian, ModeState

MIN_SPINS = 4

_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_IDENTITY = np.eye(2, dtype=complex)


def build_chain(n_spins: int) -> ChainConfig:
    if isinstance(n_spins, bool) or int(n_spins) != n_spins:
        raise ValueError(f"number of spins must be an integer, got {n_spins!r}")
    n_spins = int(n_spins)
    if n_spins % 2:
        raise ValueError(f"number of spins must be even, got N={n_spins}")
    if n_spins < MIN_SPINS:
        raise ValueError(f"number of spins must be >= {MIN_SPINS}, got N={n_spins}")
    m = np.arange(1, n_spins // 2 + 1)
    momenta = np.pi * (2 * m - 1) / n_spins
    # pin the last mode so k_N = pi - pi/N holds to the last bit
    momenta[-1] = np.pi - np.pi / n_spins
    momenta.setflags(write=False)
    return ChainConfig(n_spins=n_spins, momenta=momenta)


def mode_hamiltonian(k: float, g: float) -> ModeHamiltonian:
    gamma = 2.0 * (g + np.cos(k))
    omega = -2.0 * np.sin(k)
    return ModeHamiltonian(k=float(k), g=float(g), gamma=float(gamma), omega=float(omega), shift=float(-gamma))


def half_gap(k: np.ndarray | float, g: np.ndarray | float) -> np.ndarray:
    """Lambda_k(g) = 2 sqrt((g + cos k)^2 + sin^2 k), broadcasting over k and g."""
    return 2.0 * np.hypot(np.add(g, np.cos(k)), np.sin(k))


def bogoliubov_angle(k: np.ndarray | float, g: np.ndarray | float) -> np.ndarray | float:
    """theta_k(g) on the branch continuous in g with theta -> 0 as g -> +inf.

    2theta = atan2(-sin k, g + cos k) stays inside (-pi, 0) for k in (0, pi),
    so the atan2 branch cut is never crossed along any real path in g.
    """
    angle = 0.5 * np.arctan2(-np.sin(k), np.add(g, np.cos(k)))
    return float(angle) if np.ndim(angle) == 0 else angle


def ground_state(k: float, g: float) -> ModeState:
    theta = bogoliubov_angle(k, g)
    return ModeState(np.array([np.cos(theta), np.sin(theta)], dtype=complex))


def excited_state(k: float, g: float) -> ModeState:
    theta = bogoliubov_angle(k, g)
    return ModeState(np.array([-np.sin(theta), np.cos(theta)], dtype=complex))


def eigenbasis(momenta: np.ndarray, g: float) -> np.ndarray:
    """Per-mode 2x2 matrices whose columns are (ground, excited) at field g."""
    theta = np.asarray(bogoliubov_angle(momenta, g), dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    basis = np.empty((len(theta), 2, 2), dtype=complex)
    basis[:, 0, 0] = c
    basis[:, 1, 0] = s
    basis[:, 0, 1] = -s
    basis[:, 1, 1] = c
    return basis


def field_derivative() -> np.ndarray:
    """dH_k/dg in the even subspace: -2*1 - 2*sigma_z, independent of k and g."""
    return -2.0 * _IDENTITY - 2.0 * _SIGMA_Z


def kink_operator(k: float) -> np.ndarray:
    """Kink-count operator P_k restricted to the even subspace.

    It is the projector onto the excited state of the g = 0 mode matrix,
    (1 - cos k sigma_z + sin k sigma_x)/2 in this basis.
    """
    return 0.5 * (_IDENTITY - np.cos(k) * _SIGMA_Z + np.sin(k) * _SIGMA_X)


def kink_operators(momenta: np.ndarray) -> np.ndarray:
    c, s = np.cos(momenta), np.sin(momenta)
    ops = np.empty((len(momenta), 2, 2), dtype=complex)
    ops[:, 0, 0] = 0.5 * (1.0 - c)
    ops[:, 1, 1] = 0.5 * (1.0 + c)
    ops[:, 0, 1] = 0.5 * s
    ops[:, 1, 0] = 0.5 * s
    return ops
