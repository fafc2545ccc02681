"""Quantum-dot Bloch equations with Coulomb terms, coupled to a 1D Yee solver."""

from .coulomb import (
    FULL,
    VANISHING,
    CoulombPotential,
    CoulombTensor,
    assemble_coulomb_potential,
    energy_shifts,
    eta_cv,
    gamma_cv,
    kappa_v,
    lambda_c,
    lambda_v,
    make_synthetic_tensor,
    zeta_c,
    zeta_v,
)
from .fdtd import FieldGrid, GridSpec, inject_pulse, polarization, yee_step
from .hamiltonian import DipoleMatrices, FreeEnergies, assemble_total, assemble_v0
from .kernels import BACKEND
from .pulse import PulseSpec, corrected_amplitude, pulse_area
from .runner import RunReport, run_scenario, sweep
from .scenario import REGISTRY, Scenario, load_scenario
from .solver import MediumParams, SolverConfig, bloch_step, matrix_exponential_antihermitian, unitary_conjugation_step
from .state import (
    DensityMatrix,
    LevelLayout,
    check_bounds,
    hermiticity_defect,
    min_eigenvalue,
    project_intraband_zero,
)

__version__ = "0.1.0"
