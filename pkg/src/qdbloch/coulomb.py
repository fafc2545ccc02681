"""Coulomb coefficient tensors and the density-dependent potential V^C(rho).

Index conventions follow the level layout: ``R_c[a1, a2, a1p, a2p]`` runs
over conduction levels, ``R_v`` over valence levels and ``R_cv`` over
``c x v x c x v``.  Every matrix builder below is a direct contraction of
these tensors with a block of rho; all of them are linear in rho.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import TOL_HERM
from .errors import NonRealShift, ShapeMismatch, SymmetryViolation
from .state import DensityMatrix, LevelLayout

FULL = "full"
VANISHING = "vanishing_intraband"
MODES = (FULL, VANISHING)


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")


@dataclass(frozen=True)
class CoulombTensor:
    layout: LevelLayout
    R_c: np.ndarray
    R_v: np.ndarray
    R_cv: np.ndarray

    def __post_init__(self):
        nc, nv = self.layout.n_c, self.layout.n_v
        for name, shape in (("R_c", (nc,) * 4), ("R_v", (nv,) * 4), ("R_cv", (nc, nv, nc, nv))):
            arr = np.array(getattr(self, name), dtype=complex)
            if arr.shape != shape:
                raise ShapeMismatch(f"{name} has shape {arr.shape}, expected {shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def zeros(cls, layout: LevelLayout) -> CoulombTensor:
        nc, nv = layout.n_c, layout.n_v
        return cls(layout, np.zeros((nc,) * 4), np.zeros((nv,) * 4), np.zeros((nc, nv, nc, nv)))

    @property
    def scale(self) -> float:
        return max(float(np.max(np.abs(a), initial=0.0)) for a in (self.R_c, self.R_v, self.R_cv))

    def symmetry_defect(self) -> float:
        """Largest absolute violation of the index-swap and conjugation symmetries."""
        defects = [
            np.abs(self.R_c - self.R_c.transpose(1, 0, 3, 2)),
            np.abs(self.R_v - self.R_v.transpose(1, 0, 3, 2)),
            np.abs(self.R_c - self.R_c.transpose(2, 3, 0, 1).conj()),
            np.abs(self.R_v - self.R_v.transpose(2, 3, 0, 1).conj()),
            np.abs(self.R_cv - self.R_cv.transpose(2, 3, 0, 1).conj()),
        ]
        return float(max(np.max(d, initial=0.0) for d in defects))

    def check_symmetry(self, rtol: float = 1e-12) -> None:
        defect = self.symmetry_defect()
        if defect > rtol * max(self.scale, np.finfo(float).tiny):
            raise SymmetryViolation(f"tensor symmetry defect {defect:.3e} exceeds {rtol:.0e} relative")

    # plain-text form: one "block i j k l re im" line per nonzero entry

    def save(self, path) -> None:
        lines = [f"layout {self.layout.n_c} {self.layout.n_v}"]
        for block, arr in (("c", self.R_c), ("v", self.R_v), ("cv", self.R_cv)):
            for idx in itertools.product(*(range(n) for n in arr.shape)):
                z = arr[idx]
                if z != 0:
                    lines.append(f"{block} {' '.join(map(str, idx))} {float(z.real)!r} {float(z.imag)!r}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path, layout: LevelLayout | None = None, rtol: float = 1e-12) -> CoulombTensor:
        blocks = None
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "layout":
                file_layout = LevelLayout(int(parts[1]), int(parts[2]))
                if layout is not None and file_layout != layout:
                    raise ShapeMismatch(f"tensor file layout {file_layout} does not match {layout}")
                layout = file_layout
                t = cls.zeros(layout)
                blocks = {"c": np.array(t.R_c), "v": np.array(t.R_v), "cv": np.array(t.R_cv)}
                continue
            if blocks is None:
                raise ValueError(f"{path}:{lineno}: entries before the layout line")
            if len(parts) != 7 or parts[0] not in blocks:
                raise ValueError(f"{path}:{lineno}: expected 'block i j k l re im', got {raw!r}")
            idx = tuple(int(p) for p in parts[1:5])
            blocks[parts[0]][idx] = float(parts[5]) + 1j * float(parts[6])
        if blocks is None:
            raise ValueError(f"{path}: missing layout line")
        tensor = cls(layout, blocks["c"], blocks["v"], blocks["cv"])
        tensor.check_symmetry(rtol)
        return tensor


def _orbit_fill(shape, group, rng, R0, complex_phases):
    """Fill a tensor by drawing one value per symmetry orbit.

    ``group`` lists (permutation, conjugate) pairs; each generated value is
    copied verbatim (or conjugated) onto its orbit, so the symmetries hold
    bit-for-bit and every magnitude stays inside [0.5 R0, 1.5 R0].
    """
    out = np.zeros(shape, dtype=complex)
    done = np.zeros(shape, dtype=bool)
    for idx in itertools.product(*(range(n) for n in shape)):
        if done[idx]:
            continue
        orbit = [(tuple(idx[p] for p in perm), conj) for perm, conj in group]
        # an index fixed by a conjugating element must carry a real value
        must_be_real = any(conj and j == idx for j, conj in orbit)
        mag = R0 * rng.uniform(0.5, 1.5)
        phase = rng.uniform(-np.pi, np.pi) if complex_phases else 0.0
        z = mag * (np.sign(np.cos(phase)) or 1.0) if must_be_real else mag * np.exp(1j * phase)
        for j, conj in orbit:
            out[j] = np.conj(z) if conj else z
            done[j] = True
    return out


_BAND_GROUP = [((0, 1, 2, 3), False), ((1, 0, 3, 2), False), ((2, 3, 0, 1), True), ((3, 2, 1, 0), True)]
_CROSS_GROUP = [((0, 1, 2, 3), False), ((2, 3, 0, 1), True)]


def make_synthetic_tensor(
    layout: LevelLayout, R0: float, seed: int, complex_phases: bool = False
) -> CoulombTensor:
    """Seeded pseudo-random tensor of magnitude ~R0 obeying both symmetries exactly.

    Entries are real and positive unless ``complex_phases`` is set.
    """
    if R0 < 0:
        raise ValueError("R0 must be non-negative")
    rng = np.random.default_rng(seed)
    nc, nv = layout.n_c, layout.n_v
    R_c = _orbit_fill((nc,) * 4, _BAND_GROUP, rng, R0, complex_phases)
    R_v = _orbit_fill((nv,) * 4, _BAND_GROUP, rng, R0, complex_phases)
    R_cv = _orbit_fill((nc, nv, nc, nv), _CROSS_GROUP, rng, R0, complex_phases)
    return CoulombTensor(layout, R_c, R_v, R_cv)


def _blocks(rho, layout: LevelLayout):
    a = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    layout.check_square(a, "rho")
    return a[layout.c, layout.c], a[layout.c, layout.v], a[layout.v, layout.v]


def _check_layout(R: CoulombTensor, rho) -> LevelLayout:
    if isinstance(rho, DensityMatrix) and rho.layout != R.layout:
        raise ShapeMismatch(f"rho layout {rho.layout} does not match tensor layout {R.layout}")
    return R.layout


def _diag_only(block: np.ndarray) -> np.ndarray:
    return np.diag(np.diag(block))


def _direct_minus_exchange(R4: np.ndarray) -> np.ndarray:
    # subtract before contracting: direct and exchange terms nearly cancel for some entries
    return R4 - R4.swapaxes(2, 3)


def lambda_c(rho, R: CoulombTensor) -> np.ndarray:
    rc, _, _ = _blocks(rho, _check_layout(R, rho))
    return 2.0 * np.einsum("iaks,sa->ik", _direct_minus_exchange(R.R_c), rc)


def lambda_v(rho, R: CoulombTensor) -> np.ndarray:
    _, _, rv = _blocks(rho, _check_layout(R, rho))
    return 2.0 * np.einsum("iaks,sa->ik", _direct_minus_exchange(R.R_v), rv)


def zeta_v(rho, R: CoulombTensor) -> np.ndarray:
    """n_c x n_c contraction of R_cv with the valence block."""
    _, _, rv = _blocks(rho, _check_layout(R, rho))
    return np.einsum("iaks,sa->ik", R.R_cv, rv)


def zeta_c(rho, R: CoulombTensor) -> np.ndarray:
    """n_v x n_v contraction of R_cv with the conduction block."""
    rc, _, _ = _blocks(rho, _check_layout(R, rho))
    return np.einsum("aisk,sa->ik", R.R_cv, rc)


def gamma_cv(rho, R: CoulombTensor) -> np.ndarray:
    _, rcv, _ = _blocks(rho, _check_layout(R, rho))
    return -np.einsum("iask,sa->ik", R.R_cv, rcv)


def eta_cv(R: CoulombTensor) -> np.ndarray:
    return -np.einsum("ibkb->ik", R.R_cv)


def kappa_v(R: CoulombTensor) -> np.ndarray:
    return 2.0 * np.einsum("bikb->ik", _direct_minus_exchange(R.R_v))


@dataclass(frozen=True)
class CoulombPotential:
    V_c: np.ndarray
    V_cv: np.ndarray
    V_vc: np.ndarray
    V_v: np.ndarray

    def full(self) -> np.ndarray:
        return np.block([[self.V_c, self.V_cv], [self.V_vc, self.V_v]])


def assemble_coulomb_potential(rho, R: CoulombTensor, mode: str = FULL) -> CoulombPotential:
    """V^C(rho) block by block.

    In vanishing-intraband mode the Lambda and zeta contractions only see the
    diagonal of rho_c and rho_v.
    """
    _check_mode(mode)
    layout = _check_layout(R, rho)
    a = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    layout.check_square(a, "rho")
    if mode == VANISHING:
        a = np.array(a)
        a[layout.c, layout.c] = _diag_only(a[layout.c, layout.c])
        a[layout.v, layout.v] = _diag_only(a[layout.v, layout.v])
    g = gamma_cv(a, R)
    return CoulombPotential(
        V_c=lambda_c(a, R) + zeta_v(a, R) + eta_cv(R),
        V_cv=g,
        V_vc=g.conj().T,
        V_v=lambda_v(a, R) + zeta_c(a, R) + kappa_v(R),
    )


def energy_shifts(rho, R: CoulombTensor, tol: float = TOL_HERM) -> tuple[np.ndarray, np.ndarray]:
    """Coulomb corrections to the free conduction and valence level energies."""
    layout = _check_layout(R, rho)
    rc, _, rv = _blocks(rho, layout)
    Dc, Dv, Rcv = _direct_minus_exchange(R.R_c), _direct_minus_exchange(R.R_v), R.R_cv
    dc = 2.0 * np.einsum("iais,sa->i", Dc, rc) + np.einsum("iais,sa->i", Rcv, rv) - np.einsum("ibib->i", Rcv)
    dv = 2.0 * np.einsum("iais,sa->i", Dv, rv) + np.einsum("aisi,sa->i", Rcv, rc) + 2.0 * np.einsum("biib->i", Dv)
    rho_scale = max(1.0, float(np.max(np.abs(rc))), float(np.max(np.abs(rv))))
    limit = tol * max(R.scale, np.finfo(float).tiny) * rho_scale
    worst = max(float(np.max(np.abs(dc.imag))), float(np.max(np.abs(dv.imag))))
    if worst > limit:
        raise NonRealShift(f"energy shift has imaginary part {worst:.3e}; tensor symmetries violated?")
    return dc.real.copy(), dv.real.copy()


def coulomb_linear_map(R: CoulombTensor, mode: str = FULL) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(T, C)`` with ``V^C(rho) = einsum('abef,ef->ab', T, rho) + C``.

    The V_vc block is written as a linear function of rho_vc; it agrees with
    gamma^H for every Hermitian rho when R obeys the conjugation symmetry.
    This is the form the batched kernels consume.
    """
    _check_mode(mode)
    layout = R.layout
    d = layout.d
    c, v = layout.c, layout.v
    T = np.zeros((d, d, d, d), dtype=complex)
    Rc, Rv, Rcv = R.R_c, R.R_v, R.R_cv
    # T[a, b, e, f] multiplies rho[e, f]; sums run over rho[alpha', alpha]
    T[c, c, c, c] += 2.0 * (np.einsum("iaks->iksa", Rc) - np.einsum("iask->iksa", Rc))
    T[c, c, v, v] += np.einsum("iaks->iksa", Rcv)
    T[v, v, v, v] += 2.0 * (np.einsum("iaks->iksa", Rv) - np.einsum("iask->iksa", Rv))
    T[v, v, c, c] += np.einsum("aisk->iksa", Rcv)
    T[c, v, c, v] += -np.einsum("iask->iksa", Rcv)
    # V_vc[k, i] = -sum Rcv[s, k, i, a] rho_vc[a, s]
    T[v, c, v, c] += -np.einsum("skia->kias", Rcv)
    if mode == VANISHING:
        T[..., layout.intraband_mask()] = 0.0
    C = np.zeros((d, d), dtype=complex)
    C[c, c] = eta_cv(R)
    C[v, v] = kappa_v(R)
    return T, C
