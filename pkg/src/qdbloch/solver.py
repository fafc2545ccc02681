"""Positivity-preserving time stepping of i hbar d(rho)/dt = [V(t, rho), rho].

Each step freezes V at the current state and applies the exact unitary
conjugation for that frozen potential, so trace, Hermiticity and the
spectrum of rho are preserved up to rounding.  Freezing the
rho-dependence makes the scheme first order once Coulomb terms are on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .constants import HBAR, TOL_HERM, TOL_PSD
from .coulomb import FULL, MODES, VANISHING, CoulombTensor
from .errors import ConvergenceFailure, NonHermitianPotential
from .hamiltonian import DipoleMatrices, FreeEnergies, assemble_total
from .state import DensityMatrix, hermiticity_defect

EIGEN = "eigendecomposition"
SCALING_SQUARING = "scaling_squaring"


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    mode: str = FULL
    exp_method: str = EIGEN
    tol_herm: float = TOL_HERM
    tol_psd: float = TOL_PSD

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.exp_method not in (EIGEN, SCALING_SQUARING):
            raise ValueError(f"unknown exp_method {self.exp_method!r}")


@dataclass(frozen=True)
class MediumParams:
    """Per-dot material data: free energies, dipoles (scalar axis) and Coulomb tensor."""

    F: FreeEnergies
    M: DipoleMatrices
    R: CoulombTensor
    axis: int = 0

    def __post_init__(self):
        if not (self.F.layout == self.M.layout == self.R.layout):
            raise ValueError("free energies, dipoles and Coulomb tensor disagree on the level layout")

    @property
    def layout(self):
        return self.F.layout


def matrix_exponential_antihermitian(A, method: str = EIGEN) -> np.ndarray:
    """exp(A) for anti-Hermitian A, returned as a unitary matrix."""
    A = np.asarray(A, dtype=complex)
    if method == EIGEN:
        H = 1j * A
        H = 0.5 * (H + H.conj().T)
        try:
            w, W = np.linalg.eigh(H)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailure(str(exc)) from exc
        U = (W * np.exp(-1j * w)) @ W.conj().T
    elif method == SCALING_SQUARING:
        U = scipy.linalg.expm(A)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(U)):
        raise ConvergenceFailure("matrix exponential produced non-finite entries")
    return U


def unitary_conjugation_step(rho, V, dt: float, method: str = EIGEN, tol_herm: float = TOL_HERM):
    """rho -> U rho U^H with U = exp(-i dt V / hbar)."""
    V = np.asarray(V, dtype=complex)
    scale = max(float(np.max(np.abs(V), initial=0.0)), np.finfo(float).tiny)
    defect = hermiticity_defect(V)
    if defect > tol_herm * scale:
        raise NonHermitianPotential(f"potential Hermiticity defect {defect:.3e} (relative {defect / scale:.1e})")
    U = matrix_exponential_antihermitian(-1j * (dt / HBAR) * V, method)
    a = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    out = U @ a @ U.conj().T
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(rho.layout, out) if isinstance(rho, DensityMatrix) else out


def bloch_step(rho: DensityMatrix, t: float, E, params: MediumParams, cfg: SolverConfig) -> DensityMatrix:
    """One frozen-coefficient step; in vanishing-intraband mode the result is projected.

    A scalar ``E`` is the field component along ``params.axis``.
    """
    if np.ndim(E) == 0:
        e = np.zeros(3, dtype=complex)
        e[params.axis] = E
        E = e
    V = assemble_total(t, E, rho, params.F, params.M, params.R, cfg.mode)
    out = unitary_conjugation_step(rho, V, cfg.dt, cfg.exp_method, cfg.tol_herm)
    if cfg.mode == VANISHING:
        a = np.array(out.entries)
        a[rho.layout.intraband_mask()] = 0.0
        out = DensityMatrix(rho.layout, a)
    return out
