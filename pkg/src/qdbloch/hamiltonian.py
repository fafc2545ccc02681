"""Free-energy and dipole-coupling potentials, and the total potential V(t, rho)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .coulomb import FULL, CoulombTensor, assemble_coulomb_potential
from .errors import ShapeMismatch
from .state import LevelLayout


@dataclass(frozen=True)
class FreeEnergies:
    eps_c: np.ndarray  # J
    eps_v: np.ndarray  # J

    def __post_init__(self):
        for name in ("eps_c", "eps_v"):
            arr = np.array(getattr(self, name), dtype=float).reshape(-1)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.eps_c.size and self.eps_v.size and self.eps_c.min() <= self.eps_v.max():
            warnings.warn("a conduction level lies below a valence level", stacklevel=2)

    @property
    def layout(self) -> LevelLayout:
        return LevelLayout(self.eps_c.size, self.eps_v.size)

    def matrix(self) -> np.ndarray:
        return np.diag(np.concatenate([self.eps_c, self.eps_v])).astype(complex)


@dataclass(frozen=True)
class DipoleMatrices:
    """Vector-valued dipole matrices, last axis = Cartesian component (C m)."""

    M_c: np.ndarray  # (n_c, n_c, 3)
    M_v: np.ndarray  # (n_v, n_v, 3)
    M_cv: np.ndarray  # (n_c, n_v, 3)

    def __post_init__(self):
        for name in ("M_c", "M_v", "M_cv"):
            arr = np.array(getattr(self, name), dtype=complex)
            if arr.ndim != 3 or arr.shape[-1] != 3:
                raise ShapeMismatch(f"{name} must have shape (n, m, 3), got {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        nc, nv = self.M_c.shape[0], self.M_v.shape[0]
        if self.M_c.shape[:2] != (nc, nc) or self.M_v.shape[:2] != (nv, nv) or self.M_cv.shape[:2] != (nc, nv):
            raise ShapeMismatch("inconsistent dipole block shapes")
        for name, m in (("M_c", self.M_c), ("M_v", self.M_v)):
            scale = max(float(np.max(np.abs(m), initial=0.0)), np.finfo(float).tiny)
            if np.any(np.abs(np.einsum("iik->ik", m)) > 1e-12 * scale):
                raise ValueError(f"{name} must have a zero diagonal")
            if np.max(np.abs(m - m.transpose(1, 0, 2).conj()), initial=0.0) > 1e-12 * scale:
                raise ValueError(f"{name} must be Hermitian under index swap")
        if not np.any(self.M_cv):
            warnings.warn("M_cv is identically zero; the medium is decoupled from the field", stacklevel=2)

    @classmethod
    def scalar(cls, M_c, M_v, M_cv, axis: int = 0) -> DipoleMatrices:
        """Build from scalar matrices polarized along one Cartesian axis."""

        def lift(m):
            m = np.atleast_2d(np.asarray(m, dtype=complex))
            out = np.zeros(m.shape + (3,), dtype=complex)
            out[..., axis] = m
            return out

        return cls(lift(M_c), lift(M_v), lift(M_cv))

    @property
    def layout(self) -> LevelLayout:
        return LevelLayout(self.M_c.shape[0], self.M_v.shape[0])

    def along(self, axis: int) -> np.ndarray:
        """Full d x d Hermitian dipole matrix projected on one axis."""
        mc, mv, mcv = self.M_c[..., axis], self.M_v[..., axis], self.M_cv[..., axis]
        return np.block([[mc, mcv], [mcv.conj().T, mv]])


def _field_vector(E) -> np.ndarray:
    E = np.asarray(E, dtype=complex)
    if E.shape == ():
        return np.array([E, 0.0, 0.0], dtype=complex)
    if E.shape != (3,):
        raise ShapeMismatch(f"field must be a scalar or a 3-vector, got shape {E.shape}")
    return E


def assemble_v0(E, F: FreeEnergies, M: DipoleMatrices) -> np.ndarray:
    """V_0 = V^F + V^E(E) for a (possibly complex) field value E.

    A scalar E is taken along x.  The intra-band blocks use the Hermitian
    part of E.M, which is Re(E).M for Hermitian dipole matrices.
    """
    layout = F.layout
    if M.layout != layout:
        raise ShapeMismatch(f"dipole layout {M.layout} does not match energies {layout}")
    e = _field_vector(E)
    ec = np.tensordot(M.M_c, e, axes=([2], [0]))
    ev = np.tensordot(M.M_v, e, axes=([2], [0]))
    ecv = np.tensordot(M.M_cv, e, axes=([2], [0]))
    V = F.matrix()
    V[layout.c, layout.c] += 0.5 * (ec + ec.conj().T)
    V[layout.v, layout.v] += 0.5 * (ev + ev.conj().T)
    V[layout.c, layout.v] += ecv
    V[layout.v, layout.c] += ecv.conj().T
    return V


def assemble_total(t, E, rho, F: FreeEnergies, M: DipoleMatrices, R: CoulombTensor, mode: str = FULL):
    """V(t, rho) = V_0(t) + V^C(rho).  ``t`` is carried for API symmetry; E is already sampled at t."""
    del t
    if R.layout != F.layout:
        raise ShapeMismatch(f"tensor layout {R.layout} does not match energies {F.layout}")
    return assemble_v0(E, F, M) + assemble_coulomb_potential(rho, R, mode).full()
