"""Physics and optimisation services; each module is one layer of the quench pipeline."""

from quenchopt.services.chain import build_chain, mode_hamiltonian
from quenchopt.services.gradient import defect_gradient, finite_difference_gradient
from quenchopt.services.optimize import landscape_scan, optimize_free, optimize_power
from quenchopt.services.propagate import defect_density, evolve_mode
from quenchopt.services.pulses import linear_pulse, local_adiabatic_pulse, power_pulse
from quenchopt.services.qsl import fleming_qsl, hegerfeldt_qsl, qsl_profile
from quenchopt.services.robustness import dynamical_noise_study, initial_state_error, spin_count_error

__all__ = [
    "build_chain",
    "mode_hamiltonian",
    "defect_gradient",
    "finite_difference_gradient",
    "landscape_scan",
    "optimize_free",
    "optimize_power",
    "defect_density",
    "evolve_mode",
    "linear_pulse",
    "local_adiabatic_pulse",
    "power_pulse",
    "fleming_qsl",
    "hegerfeldt_qsl",
    "qsl_profile",
    "dynamical_noise_study",
    "initial_state_error",
    "spin_count_error",
]
