"""Piecewise-constant propagation, excitation probabilities and defect density."""

from __future__ import annotations

import numpy as np
import pytest

from quenchopt.services.chain import bogoliubov_angle, build_chain, ground_state, mode_hamiltonian
from quenchopt.services.propagate import (
    defect_count,
    defect_density,
    evolve_mode,
    evolve_modes,
    excitation_from_states,
    excitation_probability,
    fit_kz_exponent,
    grid_convergence,
    kink_expectation,
    step_unitaries,
    step_unitary,
    step_unitary_derivatives,
    sudden_density,
)
from quenchopt.services.pulses import linear_pulse, power_pulse


def test_step_unitary_short_step_is_identity() -> None:
    """dt -> 0 gives the identity."""
    np.testing.assert_allclose(step_unitary(1.1, 0.7, 1e-12), np.eye(2), atol=1e-10)


def test_step_unitary_is_unitary() -> None:
    """U^dag U = 1 for random (k, g, dt)."""
    rng = np.random.default_rng(3)
    for k, g, dt in zip(rng.uniform(0.01, 3.1, 200), rng.uniform(0, 3, 200), rng.uniform(1e-4, 5, 200)):
        u = step_unitary(k, g, dt)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-13)


def test_step_unitary_matches_matrix_exponential() -> None:
    """Closed form equals expm(-i H dt)."""
    from scipy.linalg import expm

    h = mode_hamiltonian(0.9, 1.4)
    np.testing.assert_allclose(step_unitary(0.9, 1.4, 0.37), expm(-1j * h.matrix() * 0.37), atol=1e-13)


def test_step_unitary_eigenstate_phase() -> None:
    """U|G> = exp(-i (shift - Lambda) dt)|G>."""
    k, g, dt = 2.2, 0.4, 0.9
    h = mode_hamiltonian(k, g)
    psi = ground_state(k, g).amplitudes
    expected = np.exp(-1j * h.eigenvalues[0] * dt) * psi
    np.testing.assert_allclose(step_unitary(k, g, dt) @ psi, expected, atol=1e-13)


def test_step_unitary_rejects_non_positive_dt() -> None:
    """dt must be positive."""
    with pytest.raises(ValueError):
        step_unitary(1.0, 1.0, 0.0)


def test_step_unitary_derivative_matches_difference() -> None:
    """d/dg of the closed-form step equals a central difference in g."""
    momenta = np.array([0.3, 1.7, 3.0])
    fields = np.array([0.2, 1.0, 1.9])
    h = 1e-6
    numeric = (step_unitaries(momenta, fields + h, 0.05) - step_unitaries(momenta, fields - h, 0.05)) / (2 * h)
    np.testing.assert_allclose(step_unitary_derivatives(momenta, fields, 0.05), numeric, atol=1e-8)


def test_constant_field_stays_in_ground_state() -> None:
    """Without a change of g nothing is excited."""
    chain = build_chain(12)
    pulse = linear_pulse(5.0, 400)
    final = evolve_modes(chain.momenta, pulse, samples=np.full(400, 1.0))
    assert np.all(excitation_from_states(chain.momenta, final, 1.0) < 1e-20)


def test_sudden_limit_matches_closed_form() -> None:
    """T = 1e-6 reproduces the sudden-quench overlap sum."""
    chain = build_chain(24)
    result = defect_density(linear_pulse(1e-6, 11), chain)
    assert result.density == pytest.approx(sudden_density(chain), abs=1e-6)


def test_sudden_excitation_of_one_mode() -> None:
    """k = pi/2: P = sin^2(-pi/4 - arctan(-1/2)/2)."""
    expected = np.sin(-np.pi / 4 - 0.5 * np.arctan(-0.5)) ** 2
    assert excitation_probability(np.pi / 2, linear_pulse(1e-6, 11)) == pytest.approx(expected, abs=1e-8)
    assert expected == pytest.approx(
        np.sin(bogoliubov_angle(np.pi / 2, 0.0) - bogoliubov_angle(np.pi / 2, 2.0)) ** 2)


def test_slow_linear_quench_is_adiabatic() -> None:
    """N=8, T=1e4: every P_k < 1e-3."""
    result = defect_density(linear_pulse(1e4, 10_000), build_chain(8))
    assert np.all(result.excitation < 1e-3)
    assert result.density < 1e-3


def test_states_stay_orthonormal_over_long_runs() -> None:
    """Norms and the phi / phi_bar overlap drift by at most 1e-10 over 1e4 steps."""
    chain = build_chain(24)
    final = evolve_modes(chain.momenta, power_pulse(2.0, 3.0, 10_000))
    gram = np.einsum("mai,maj->mij", final.conj(), final)
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(2), gram.shape), atol=1e-10)


def test_overlap_and_kink_routes_agree() -> None:
    """|<E(0)|phi>|^2, the kink expectation and |<G(0)|phi_bar>|^2 coincide."""
    chain = build_chain(12)
    pulse = power_pulse(2.0, 3.0, 2000)
    for k in chain.momenta:
        evolution = evolve_mode(k, pulse)
        p_overlap = excitation_probability(k, pulse)
        p_kink = kink_expectation(k, evolution.phi)
        p_barred = abs(ground_state(k, 0.0).overlap(evolution.phi_bar)) ** 2
        assert p_overlap == pytest.approx(p_kink, abs=1e-10)
        assert p_overlap == pytest.approx(p_barred, abs=1e-10)


def test_trajectory_ends_at_final_states() -> None:
    """Stored trajectories start in the eigenbasis and end at the final-state run."""
    chain = build_chain(8)
    pulse = power_pulse(1.5, 2.0, 301)
    traj = evolve_modes(chain.momenta, pulse, store_trajectory=True)
    final = evolve_modes(chain.momenta, pulse)
    assert traj.shape == (301, chain.n_modes, 2, 2)
    np.testing.assert_allclose(traj[-1], final, atol=1e-12)
    np.testing.assert_allclose(traj[0, :, :, 0], [ground_state(k, 2.0).amplitudes for k in chain.momenta], atol=1e-15)


def test_mode_order_does_not_matter() -> None:
    """Evaluating modes in reverse order gives the same P_k."""
    chain = build_chain(16)
    pulse = power_pulse(3.0, 2.0, 500)
    forward = excitation_from_states(chain.momenta, evolve_modes(chain.momenta, pulse), 0.0)
    reversed_momenta = chain.momenta[::-1].copy()
    backward = excitation_from_states(reversed_momenta, evolve_modes(reversed_momenta, pulse), 0.0)
    np.testing.assert_allclose(forward, backward[::-1], rtol=0, atol=1e-15)


def test_worker_count_does_not_change_results() -> None:
    """Splitting modes over threads leaves every P_k unchanged."""
    chain = build_chain(20)
    pulse = power_pulse(2.0, 2.0, 400)
    serial = defect_density(pulse, chain).excitation
    threaded = defect_density(pulse, chain, workers=3).excitation
    np.testing.assert_allclose(serial, threaded, rtol=0, atol=1e-15)


def test_defect_density_invariants() -> None:
    """D = 2 sum P_k, rho = D/N inside [0, 1], and D agrees with defect_count."""
    chain = build_chain(24)
    pulse = linear_pulse(2.0, 1000)
    result = defect_density(pulse, chain)
    assert result.defects == pytest.approx(2 * result.excitation.sum())
    assert 0.0 <= result.density <= 1.0
    assert result.density == pytest.approx(result.defects / 24)
    assert defect_count(pulse, chain) == pytest.approx(result.defects, rel=1e-12)
    assert 0.0 <= result.slowest_mode_share <= 1.0
    assert len(result.per_mode) == chain.n_modes
    assert result.final_states.shape == (chain.n_modes, 2, 2)


def test_linear_quench_density_falls_with_duration() -> None:
    """Longer linear quenches leave fewer defects."""
    chain = build_chain(100)
    densities = [defect_density(linear_pulse(T, 4000), chain, keep_states=False).density for T in (5, 10, 20, 40)]
    assert all(a > b for a, b in zip(densities, densities[1:]))


def test_doubling_the_grid_changes_rho_by_less_than_one_percent() -> None:
    """rho is converged at a few thousand points for moderate pulses."""
    chain = build_chain(24)
    assert grid_convergence(lambda n: power_pulse(2.0, 3.0, n), chain, n_steps=4000) < 0.01
    assert grid_convergence(lambda n: linear_pulse(3.0, n), chain, n_steps=4000) < 0.01


@pytest.mark.slow
def test_kibble_zurek_exponent() -> None:
    """Linear quenches at N=400 scale as T^(-1/2)."""
    slope = fit_kz_exponent(400, [20.0, 40.0, 80.0, 120.0, 200.0], n_steps=10_000)
    assert slope == pytest.approx(-0.5, abs=0.05)
