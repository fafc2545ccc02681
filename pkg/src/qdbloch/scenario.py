"""Scenario description, flat key=value files and the built-in registry.

Level energies are given in units of hbar*omega0 so that a scenario stays
meaningful when the carrier frequency is overridden.  Valence levels are
listed deepest first; the top valence level is the SIT lower level.
"""

from __future__ import annotations

import dataclasses
import os
import typing
from dataclasses import dataclass

import numpy as np

from .constants import C0, HBAR
from .coulomb import FULL, MODES, VANISHING
from .errors import ConfigError

BOUNDARIES = ("mur", "pec")
INITIAL_STATES = ("ground", "custom")


@dataclass(frozen=True)
class Scenario:
    name: str = "custom"
    # level structure
    n_c: int = 1
    n_v: int = 1
    eps_c: tuple[float, ...] = (1.0,)  # units of hbar*omega0
    eps_v: tuple[float, ...] = ()  # units of hbar*omega0; empty = derived from valence_splitting
    valence_splitting: float = 2.0  # units of hbar*omega0, gap between adjacent valence levels
    # dipoles (C m): every inter-band pair gets `dipole`, intra-band pairs dipole * dipole_intraband
    dipole: float = 1e-29
    dipole_intraband: float = 1.0
    axis: int = 0
    # Coulomb coupling
    R0: float = 0.0  # J
    seed: int = 47
    complex_phases: bool = False
    mode: str = FULL
    # pulse
    k: float = 2.0
    tau: float = 50e-15  # s
    carrier_frequency: float = 2e14  # Hz
    area_correction: bool = True
    # grid
    cells_per_wavelength: float = 20.0
    courant: float = 0.5
    n_left: int = 40
    n_medium: int = 200
    n_right: int = 40
    N_b: float = 5e24  # m^-3
    boundary: str = "mur"
    n_steps: int = 0  # 0 = long enough for the pulse to clear the medium
    field_free: bool = False  # single dot with E = 0, no Maxwell coupling
    # initial state
    initial_state: str = "ground"
    init_populations: tuple[float, ...] = ()
    init_valence_coherence: float = 0.0  # real rho_v[0, 1] for the custom state
    # probes and output
    probe_cell: int = 0  # index within the medium
    record_stride: int = 10
    snapshot_stride: int = 0  # 0 = no field snapshots
    backend: str = ""

    def __post_init__(self):
        self.validate()

    # derived quantities

    @property
    def omega0(self) -> float:
        return 2.0 * np.pi * self.carrier_frequency

    @property
    def wavelength(self) -> float:
        return C0 / self.carrier_frequency

    @property
    def d(self) -> int:
        return self.n_c + self.n_v

    def valence_energies(self) -> tuple[float, ...]:
        """Valence energies in units of hbar*omega0, deepest first, top level at 0."""
        if self.eps_v:
            return tuple(self.eps_v)
        return tuple(-self.valence_splitting * (self.n_v - 1 - j) + 0.0 for j in range(self.n_v))

    def energies_joule(self) -> tuple[np.ndarray, np.ndarray]:
        u = HBAR * self.omega0
        return np.asarray(self.eps_c, float) * u, np.asarray(self.valence_energies(), float) * u

    def initial_matrix(self) -> np.ndarray:
        d = self.d
        rho = np.zeros((d, d), dtype=complex)
        if self.initial_state == "ground":
            rho[-1, -1] = 1.0
            return rho
        rho[np.diag_indices(d)] = self.init_populations
        if self.init_valence_coherence:
            i, j = self.n_c, self.n_c + 1
            rho[i, j] = rho[j, i] = self.init_valence_coherence
        return rho

    def validate(self) -> None:
        err = []
        if self.n_c < 1 or self.n_v < 1:
            err.append("n_c and n_v must be >= 1")
        if len(self.eps_c) != self.n_c:
            err.append(f"eps_c needs {self.n_c} entries, got {len(self.eps_c)}")
        if self.eps_v and len(self.eps_v) != self.n_v:
            err.append(f"eps_v needs {self.n_v} entries, got {len(self.eps_v)}")
        if self.mode not in MODES:
            err.append(f"mode must be one of {MODES}")
        if self.boundary not in BOUNDARIES:
            err.append(f"boundary must be one of {BOUNDARIES}")
        if self.initial_state not in INITIAL_STATES:
            err.append(f"initial_state must be one of {INITIAL_STATES}")
        for name in ("dipole", "tau", "carrier_frequency", "cells_per_wavelength", "courant"):
            if not getattr(self, name) > 0:
                err.append(f"{name} must be positive")
        if self.R0 < 0 or self.N_b < 0 or self.k < 0:
            err.append("R0, N_b and k must be non-negative")
        if self.axis not in (0, 1, 2):
            err.append("axis must be 0, 1 or 2")
        if self.n_medium < 1 or self.n_left < 4 or self.n_right < 4:
            err.append("need n_medium >= 1 and at least 4 vacuum cells on each side")
        if not 0 <= self.probe_cell < max(self.n_medium, 1):
            err.append("probe_cell must index a medium cell")
        if self.record_stride < 1 or self.snapshot_stride < 0 or self.n_steps < 0:
            err.append("strides and n_steps must be non-negative (record_stride >= 1)")
        if self.initial_state == "custom":
            p = np.asarray(self.init_populations, float)
            if p.size != self.d:
                err.append(f"init_populations needs {self.d} entries")
            elif np.any(p < 0):
                err.append("init_populations must be non-negative")
            if self.init_valence_coherence and self.n_v < 2:
                err.append("init_valence_coherence needs two valence levels")
        if err:
            raise ConfigError(f"scenario {self.name!r}: " + "; ".join(err))

    def replace(self, **changes) -> Scenario:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}


_HINTS = typing.get_type_hints(Scenario)
FIELD_NAMES = tuple(f.name for f in dataclasses.fields(Scenario))


def _convert(key: str, raw: str):
    hint = _HINTS[key]
    raw = raw.strip()
    try:
        if hint is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if hint is int:
            return int(raw)
        if hint is float:
            return float(raw)
        if hint is str:
            return raw
        # tuple[float, ...]
        return tuple(float(x) for x in raw.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"cannot parse {key}={raw!r} as {getattr(hint, '__name__', hint)}") from None


def format_value(value) -> str:
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def apply_overrides(base: Scenario, pairs: dict[str, str]) -> Scenario:
    unknown = sorted(set(pairs) - set(FIELD_NAMES))
    if unknown:
        raise ConfigError(f"unknown scenario keys: {', '.join(unknown)}")
    changes = {k: _convert(k, v) for k, v in pairs.items()}
    return base.replace(**changes)


def parse_pairs(lines, origin: str = "<string>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected key = value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def parse_override(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise ConfigError(f"override must look like key=value, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def load_scenario(path) -> Scenario:
    """Read a flat key=value file.  A ``base`` key starts from a registry entry."""
    with open(path) as fh:
        pairs = parse_pairs(fh, str(path))
    base_name = pairs.pop("base", None)
    base = get_registered(base_name) if base_name else Scenario(name=pairs.get("name", "custom"))
    return apply_overrides(base, pairs)


def dump_scenario(s: Scenario) -> str:
    return "".join(f"{k} = {format_value(v)}\n" for k, v in s.to_dict().items())


# Coulomb-family scenarios run at a lower carrier so that R0 of a few 1e-21 J
# is a sizeable fraction of the level spacing.
_COULOMB = dict(n_v=2, valence_splitting=2.0, carrier_frequency=1e14, N_b=1e24)

REGISTRY: dict[str, Scenario] = {
    s.name: s
    for s in (
        Scenario(name="sit-2level", n_v=1),
        Scenario(name="sit-3level-resonant", n_v=2, valence_splitting=1.0),
        Scenario(name="sit-3level-detuned", n_v=2, valence_splitting=2.0),
        Scenario(name="coulomb-weak", R0=1e-21, **_COULOMB),
        Scenario(name="coulomb-strong", R0=3e-21, **_COULOMB),
        Scenario(name="ablation-free", R0=1e-21, mode=VANISHING, **_COULOMB),
        Scenario(name="ablation-strong", R0=3e-21, mode=VANISHING, **_COULOMB),
        Scenario(
            name="field-free-remark", R0=3e-21, field_free=True, n_steps=10_000,
            initial_state="custom", init_populations=(0.3, 0.2, 0.5), init_valence_coherence=0.2,
            record_stride=100, **_COULOMB,
        ),
    )
}


def get_registered(name: str) -> Scenario:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ConfigError(f"unknown registry scenario {name!r}; known: {', '.join(REGISTRY)}") from None


def resolve(spec: str) -> Scenario:
    """Registry name or path to a scenario file."""
    if spec in REGISTRY:
        return REGISTRY[spec]
    if not os.path.exists(spec):
        raise ConfigError(f"{spec!r} is neither a registry scenario nor an existing file")
    return load_scenario(spec)
