"""Simulator and analysis toolkit for amplitude-modulated two-level search.

The package models an analog search Hamiltonian whose control schedule
is driven periodically through its avoided crossing, projects it onto
the two-dimensional subspace where the dynamics live, integrates the
resulting driven two-level (and three-level) systems exactly, and
compares the observed population transfer against rotating-wave
effective models built from Bessel-function resummation.
"""

from .bessel import bessel_j, j0_roots
from .hamiltonians import (
    FULL_DIM_CAP,
    BarBasis,
    DriveParams,
    HermitianOperator,
    add_sigma_z_error,
    bar_basis,
    bar_states_full,
    control_s,
    gap,
    h_driven_projected,
    h_grover_full,
    h_grover_projected,
    h_lzs,
    h_three_level,
)
from .propagator import (
    InsufficientDataError,
    StateVector,
    StepControl,
    Trajectory,
    basis_state,
    max_population,
    measure_rabi_frequency,
    population,
    propagate,
    steps_per_period,
)
from .rwa import (
    EffectiveHamiltonian,
    cdt_design_omega,
    effective_h_noisy_algB,
    effective_h_three_level,
    rabi_frequency_algB,
    rabi_frequency_lzs,
    rabi_frequency_noisy_half,
)
from .experiments import (
    Axis,
    ScalingFit,
    SweepGrid,
    double_crossing_scan,
    grover_run,
    noise_map,
    rwa_table,
    rwa_vs_exact_report,
    runtime_scaling,
    success_time,
    three_level_scan,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "bessel_j",
    "j0_roots",
    "FULL_DIM_CAP",
    "BarBasis",
    "DriveParams",
    "HermitianOperator",
    "add_sigma_z_error",
    "bar_basis",
    "bar_states_full",
    "control_s",
    "gap",
    "h_driven_projected",
    "h_grover_full",
    "h_grover_projected",
    "h_lzs",
    "h_three_level",
    "InsufficientDataError",
    "StateVector",
    "StepControl",
    "Trajectory",
    "basis_state",
    "max_population",
    "measure_rabi_frequency",
    "population",
    "propagate",
    "steps_per_period",
    "EffectiveHamiltonian",
    "cdt_design_omega",
    "effective_h_noisy_algB",
    "effective_h_three_level",
    "rabi_frequency_algB",
    "rabi_frequency_lzs",
    "rabi_frequency_noisy_half",
    "Axis",
    "ScalingFit",
    "SweepGrid",
    "double_crossing_scan",
    "grover_run",
    "noise_map",
    "rwa_table",
    "rwa_vs_exact_report",
    "runtime_scaling",
    "success_time",
    "three_level_scan",
]
