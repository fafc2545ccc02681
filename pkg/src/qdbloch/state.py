"""Block-structured density matrices and their structural checks.

Levels are ordered conduction first, then valence, so a matrix of
dimension ``d = n_c + n_v`` splits into the blocks::

    | rho_c   rho_cv |
    | rho_vc  rho_v  |

with ``rho_vc = rho_cv^H``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import TOL_HERM, TOL_PSD
from .errors import NonHermitianInput, ShapeMismatch


@dataclass(frozen=True)
class LevelLayout:
    n_c: int
    n_v: int

    def __post_init__(self):
        if self.n_c < 1 or self.n_v < 1:
            raise ValueError(f"need at least one level per band, got {self.n_c}, {self.n_v}")

    @property
    def d(self) -> int:
        return self.n_c + self.n_v

    @property
    def c(self) -> slice:
        return slice(0, self.n_c)

    @property
    def v(self) -> slice:
        return slice(self.n_c, self.d)

    def intraband_mask(self) -> np.ndarray:
        """Boolean d x d mask of the off-diagonal entries inside rho_c and rho_v."""
        m = np.zeros((self.d, self.d), dtype=bool)
        m[self.c, self.c] = True
        m[self.v, self.v] = True
        np.fill_diagonal(m, False)
        return m

    def check_square(self, a: np.ndarray, what: str = "matrix") -> None:
        if a.shape != (self.d, self.d):
            raise ShapeMismatch(f"{what} has shape {a.shape}, layout needs {(self.d, self.d)}")


@dataclass(frozen=True)
class DensityMatrix:
    """Immutable snapshot of a d x d density matrix with its level layout."""

    layout: LevelLayout
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex, copy=True)
        self.layout.check_square(a, "density matrix")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @classmethod
    def ground(cls, layout: LevelLayout, level: int | None = None, trace: float = 1.0):
        """All population in one level (default: the last, i.e. highest-index valence level)."""
        k = layout.d - 1 if level is None else level
        a = np.zeros((layout.d, layout.d), dtype=complex)
        a[k, k] = trace
        return cls(layout, a)

    @property
    def rho_c(self) -> np.ndarray:
        return self.entries[self.layout.c, self.layout.c]

    @property
    def rho_cv(self) -> np.ndarray:
        return self.entries[self.layout.c, self.layout.v]

    @property
    def rho_vc(self) -> np.ndarray:
        return self.entries[self.layout.v, self.layout.c]

    @property
    def rho_v(self) -> np.ndarray:
        return self.entries[self.layout.v, self.layout.v]

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def populations(self) -> np.ndarray:
        return np.diag(self.entries).real.copy()

    def to_pairs(self) -> list[float]:
        """Row-major (re, im) pairs, the CSV serialization."""
        flat = self.entries.ravel()
        return [x for z in flat for x in (float(z.real), float(z.imag))]

    @classmethod
    def from_pairs(cls, layout: LevelLayout, pairs) -> DensityMatrix:
        arr = np.asarray(pairs, dtype=float)
        if arr.size != 2 * layout.d**2:
            raise ShapeMismatch(f"expected {2 * layout.d**2} values, got {arr.size}")
        z = arr[0::2] + 1j * arr[1::2]
        return cls(layout, z.reshape(layout.d, layout.d))


def _as_array(rho) -> np.ndarray:
    return rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def hermiticity_defect(rho) -> float:
    """max_ij |rho_ij - conj(rho_ji)|."""
    a = _as_array(rho)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)))


def min_eigenvalue(rho, tol_herm: float = TOL_HERM) -> float:
    a = _as_array(rho)
    scale = max(float(np.max(np.abs(a))), 1.0) if a.size else 1.0
    defect = hermiticity_defect(a)
    if defect > tol_herm * scale:
        raise NonHermitianInput(f"Hermiticity defect {defect:.3e} exceeds {tol_herm:.1e} (relative)")
    # eigvalsh reads the lower triangle only, so symmetrize first
    return float(np.linalg.eigvalsh(0.5 * (a + a.conj().T))[0])


def is_psd(rho, trace0: float = 1.0, tol_psd: float = TOL_PSD) -> bool:
    return min_eigenvalue(rho) >= -tol_psd * abs(trace0)


@dataclass(frozen=True)
class BoundsReport:
    populations_ok: bool
    coherences_ok: bool
    # (row, col, value) of the worst offender in each category
    worst_population: tuple[int, int, float]
    worst_coherence: tuple[int, int, float]
    negative_population: bool

    @property
    def ok(self) -> bool:
        return self.populations_ok and self.coherences_ok


def check_bounds(rho, trace0: float, tol: float = TOL_PSD) -> BoundsReport:
    """Check populations in [0, Tr rho(0)] and coherences bounded by Tr rho(0)/2.

    Both bounds hold for every PSD matrix of the given trace, so a
    violation certifies a non-physical state.
    """
    if trace0 <= 0:
        raise ValueError("trace0 must be positive")
    a = _as_array(rho)
    t = tol * trace0
    pops = np.diag(a).real
    # distance outside [0, trace0]; positive means violated
    excess = np.maximum(-pops, pops - trace0)
    ip = int(np.argmax(excess))
    offdiag = np.abs(a).copy()
    np.fill_diagonal(offdiag, -np.inf)
    flat = int(np.argmax(offdiag))
    ic, jc = divmod(flat, a.shape[0])
    worst_coh = float(offdiag[ic, jc]) if a.shape[0] > 1 else 0.0
    return BoundsReport(
        populations_ok=bool(excess[ip] <= t),
        coherences_ok=bool(worst_coh <= trace0 / 2 + t),
        worst_population=(ip, ip, float(pops[ip])),
        worst_coherence=(ic, jc, worst_coh),
        negative_population=bool(np.min(pops) < -t),
    )


def project_intraband_zero(rho):
    """Zero the off-diagonal entries of rho_c and rho_v, returning a new matrix.

    Inter-band blocks and all diagonals are left untouched, so the trace
    is preserved exactly.
    """
    if isinstance(rho, DensityMatrix):
        a = np.array(rho.entries)
        a[rho.layout.intraband_mask()] = 0.0
        return DensityMatrix(rho.layout, a)
    raise TypeError("project_intraband_zero expects a DensityMatrix; use project_intraband_array for arrays")


def project_intraband_array(a: np.ndarray, layout: LevelLayout) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out[..., layout.intraband_mask()] = 0.0
    return out
