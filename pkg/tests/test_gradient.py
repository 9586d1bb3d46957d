"""Functional gradient of D against finite differences and the chain rule in r."""

from __future__ import annotations

import numpy as np
import pytest

from quenchopt.services.chain import build_chain
from quenchopt.services.gradient import (
    chain_rule_slope,
    defect_gradient,
    finite_difference_gradient,
    literal_defect_gradient,
    power_direction,
)
from quenchopt.services.optimize import PowerObjective
from quenchopt.services.propagate import defect_count, evolve_modes
from quenchopt.services.pulses import linear_pulse, power_pulse, with_samples


def _sample_indices(n_steps: int) -> list[int]:
    return [1, n_steps // 5, n_steps // 3, n_steps // 2, 2 * n_steps // 3, n_steps - 2]


def _max_relative_error(values: np.ndarray, reference: np.ndarray, idx: list[int]) -> float:
    return float(np.max(np.abs(values[idx] - reference[idx])) / np.max(np.abs(reference[idx])))


@pytest.mark.parametrize(
    ("n_spins", "T", "r"),
    [(8, 2.0, 1.5), (12, 3.0, 0.7), (16, 1.5, 3.2), (24, 3.0, 2.0), (10, 5.0, 4.5)],
)
def test_exact_gradient_matches_finite_differences(n_spins: int, T: float, r: float) -> None:
    """Interior entries agree with central differences to 1e-6 in max norm."""
    chain = build_chain(n_spins)
    pulse = power_pulse(r, T, 300)
    idx = _sample_indices(pulse.n_steps)
    exact = defect_gradient(pulse, chain).values
    fd = finite_difference_gradient(pulse, chain, h=1e-5, indices=idx).values
    assert _max_relative_error(exact, fd, idx) <= 1e-6


def test_finite_difference_step_plateau() -> None:
    """h = 1e-4, 1e-5 and 1e-6 give the same derivative to well below 1e-5."""
    chain = build_chain(8)
    pulse = power_pulse(2.0, 2.0, 200)
    idx = _sample_indices(pulse.n_steps)
    ref = finite_difference_gradient(pulse, chain, h=1e-5, indices=idx).values
    for h in (1e-4, 1e-6):
        other = finite_difference_gradient(pulse, chain, h=h, indices=idx).values
        assert _max_relative_error(other, ref, idx) < 1e-5


def test_finite_difference_leaves_unlisted_entries_empty() -> None:
    """Only requested entries are computed; h must be positive."""
    chain = build_chain(8)
    pulse = linear_pulse(1.0, 50)
    fd = finite_difference_gradient(pulse, chain, indices=[10]).values
    assert np.isfinite(fd[10]) and np.isnan(fd[11])
    with pytest.raises(ValueError):
        finite_difference_gradient(pulse, chain, h=0.0)


def test_continuum_form_converges_to_exact() -> None:
    """The pointwise formula differs from the exact derivative by a grid-size effect only."""
    chain = build_chain(8)
    pulse = power_pulse(1.5, 2.0, 2000)
    exact = defect_gradient(pulse, chain, method="exact").values
    continuum = defect_gradient(pulse, chain, method="continuum").values
    assert continuum.shape == exact.shape
    inner = slice(1, -1)
    assert np.max(np.abs(continuum[inner] - exact[inner])) / np.max(np.abs(exact[inner])) < 5e-2


def test_unknown_gradient_method_is_rejected() -> None:
    """Only exact and continuum are available."""
    with pytest.raises(ValueError):
        defect_gradient(linear_pulse(1.0, 20), build_chain(8), method="spline")


def test_identity_part_of_field_coupling_drops_out() -> None:
    """<phi_bar(t)|phi(t)> vanishes along the whole trajectory."""
    chain = build_chain(8)
    traj = evolve_modes(chain.momenta, power_pulse(2.0, 2.0, 400), store_trajectory=True)
    cross = np.einsum("tma,tma->tm", traj[..., 1].conj(), traj[..., 0])
    assert np.max(np.abs(cross)) < 1e-12


def test_gradient_is_finite_and_grid_shaped() -> None:
    """Same length as the pulse, real and finite."""
    pulse = power_pulse(2.0, 3.0, 500)
    grad = defect_gradient(pulse, build_chain(24))
    assert grad.n_steps == pulse.n_steps
    assert grad.values.dtype == np.float64
    assert np.all(np.isfinite(grad.values))
    assert len(grad.interior) == pulse.n_steps - 2
    np.testing.assert_allclose(grad.times, pulse.times)


def test_first_order_taylor_along_a_bump() -> None:
    """D(g + eps*bump) - D(g) matches eps * dt * <grad, bump> to O(eps^2)."""
    chain = build_chain(10)
    pulse = power_pulse(2.0, 2.0, 400)
    grad = defect_gradient(pulse, chain).values
    t = pulse.times
    bump = np.exp(-((t - 0.3) / 0.4) ** 2)
    bump[0] = bump[-1] = 0.0
    base = defect_count(pulse, chain)
    linear_term = pulse.dt * float(np.dot(grad, bump))
    errors = []
    for eps in (1e-2, 5e-3):
        moved = defect_count(with_samples(pulse, pulse.samples + eps * bump), chain)
        errors.append(abs(moved - base - eps * linear_term))
    # second-order remainder: halving eps quarters the error
    assert errors[1] < 0.35 * errors[0]


def test_gradient_is_small_in_the_adiabatic_regime() -> None:
    """N=8: |grad| shrinks by 10x or more between T = N/10 and T = 10 N."""
    chain = build_chain(8)
    fast = defect_gradient(linear_pulse(0.8, 2000), chain).interior
    slow = defect_gradient(linear_pulse(80.0, 8000), chain).interior
    assert np.max(np.abs(slow)) * 10 <= np.max(np.abs(fast))


def test_power_direction_limits() -> None:
    """dg/dr is zero at t = -T, 0, T and odd in t."""
    direction = power_direction(2.0, 3.0, 101)
    assert direction[0] == 0.0 and direction[-1] == 0.0 and direction[50] == 0.0
    np.testing.assert_allclose(direction, -direction[::-1], atol=1e-12)
    with pytest.raises(ValueError):
        power_direction(0.0, 3.0, 101)


def test_power_direction_matches_difference_in_r() -> None:
    """Central difference of the power pulse in r reproduces dg/dr."""
    h = 1e-5
    numeric = (power_pulse(1.7 + h, 2.0, 301).samples - power_pulse(1.7 - h, 2.0, 301).samples) / (2 * h)
    np.testing.assert_allclose(power_direction(1.7, 2.0, 301), numeric, atol=1e-8)


def test_chain_rule_slope_matches_scalar_difference() -> None:
    """dt * sum grad * dg/dr equals the central difference of D(r)."""
    chain = build_chain(12)
    objective = PowerObjective(chain, 3.0, 400)
    h = 1e-5
    numeric = (objective(1.3 + h) - objective(1.3 - h)) / (2 * h)
    assert objective.slope(1.3) == pytest.approx(numeric, rel=1e-6, abs=1e-9)
    pulse = objective.pulse(1.3)
    direct = chain_rule_slope(defect_gradient(pulse, chain), power_direction(1.3, 3.0, 400), pulse.dt)
    assert direct == objective.slope(1.3)


def test_descent_sign_identity() -> None:
    """Moving r against dD/dr lowers D for a small step."""
    chain = build_chain(12)
    objective = PowerObjective(chain, 3.0, 400)
    slope = objective.slope(1.0)
    assert slope != 0.0
    assert objective(1.0 - 1e-3 * slope) < objective(1.0)


def test_literal_transcription_is_reported_separately() -> None:
    """The transcribed closed form is finite, labelled as its own method, and off by O(1) from finite differences."""
    chain = build_chain(8)
    pulse = power_pulse(1.5, 2.0, 400)
    idx = _sample_indices(pulse.n_steps)
    grad = literal_defect_gradient(pulse, chain)
    assert grad.method == "literal"
    assert np.all(np.isfinite(grad.values))
    fd = finite_difference_gradient(pulse, chain, h=1e-5, indices=idx).values
    assert _max_relative_error(defect_gradient(pulse, chain).values, fd, idx) <= 1e-6
    assert _max_relative_error(grad.values, fd, idx) > 1.0
