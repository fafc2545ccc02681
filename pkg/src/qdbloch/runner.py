"""Coupled time loop, diagnostics and run outputs."""

from __future__ import annotations

import csv
import json
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import hilbert

from . import kernels
from .constants import HBAR, TOL_PSD
from .coulomb import VANISHING, make_synthetic_tensor
from .errors import ConfigError
from .fdtd import BlochMedium, FieldGrid, GridSpec, inject_pulse, yee_step
from .hamiltonian import DipoleMatrices, FreeEnergies
from .pulse import PulseSpec
from .scenario import FIELD_NAMES, Scenario, dump_scenario, format_value
from .solver import MediumParams
from .state import LevelLayout

SWEEP_PARAMS = ("R0", "k", "mode", "valence_splitting")


def build_medium_params(s: Scenario) -> MediumParams:
    layout = LevelLayout(s.n_c, s.n_v)
    ec, ev = s.energies_joule()
    F = FreeEnergies(ec, ev)
    intra = s.dipole * s.dipole_intraband
    M_c = intra * (1.0 - np.eye(s.n_c))
    M_v = intra * (1.0 - np.eye(s.n_v))
    M_cv = s.dipole * np.ones((s.n_c, s.n_v))
    M = DipoleMatrices.scalar(M_c, M_v, M_cv, axis=s.axis)
    R = make_synthetic_tensor(layout, s.R0, s.seed, complex_phases=s.complex_phases)
    return MediumParams(F, M, R, axis=s.axis)


def build_pulse(s: Scenario) -> PulseSpec | None:
    if s.k == 0 or s.field_free:
        return None
    return PulseSpec.from_area(
        s.k, s.dipole, s.tau, s.omega0, corrected=s.area_correction, t_center=10.0 * s.tau
    )


def build_grid_spec(s: Scenario) -> GridSpec:
    nz = s.n_left + s.n_medium + s.n_right
    return GridSpec.from_wavelength(
        s.wavelength, s.cells_per_wavelength, s.courant, nz,
        medium_range=(s.n_left, s.n_left + s.n_medium), N_b=s.N_b, boundary=s.boundary,
    )


def default_steps(s: Scenario, spec: GridSpec) -> int:
    """Pulse duration plus one grid transit, with the same again for the delay inside the medium."""
    transit = spec.nz * spec.dz / spec.c
    return int(np.ceil((20.0 * s.tau + 2.0 * transit + 6.0 * s.tau) / spec.dt))


@dataclass
class RunReport:
    scenario: Scenario
    t: np.ndarray  # recorded times
    probes: dict[str, np.ndarray]  # recorded series, aligned with t
    summary: dict[str, float]
    E_out: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))  # transmitted field, every step
    E_in: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))  # field at the probe cell, every step
    dt: float = 0.0
    snapshots: list = field(repr=False, default_factory=list)
    elapsed: float = 0.0

    def write(self, out_dir) -> None:
        write_outputs(self, out_dir)


class _Recorder:
    """Diagnostics accumulated over the run."""

    def __init__(self, rho: np.ndarray, s: Scenario):
        self.tr0 = np.einsum("nii->n", rho).real.copy()
        self.tr_prev = self.tr0.copy()
        self.max_step_drift = 0.0
        self.max_herm = 0.0
        self.min_eig = np.inf
        self.d = rho.shape[1]
        self.n_c = s.n_c
        self.cell = s.probe_cell
        self.max_pop = np.full(self.d, -np.inf)
        self.min_pop = np.full(self.d, np.inf)
        self.rows: list[list[float]] = []

    def every_step(self, rho: np.ndarray) -> None:
        tr = np.einsum("nii->n", rho).real
        drift = float(np.max(np.abs(tr - self.tr_prev) / np.abs(self.tr0)))
        self.max_step_drift = max(self.max_step_drift, drift)
        self.tr_prev = tr
        pops = np.diagonal(rho[self.cell]).real
        np.maximum(self.max_pop, pops, out=self.max_pop)
        np.minimum(self.min_pop, pops, out=self.min_pop)

    def record(self, t: float, E_probe: float, rho: np.ndarray) -> None:
        herm = float(np.max(np.abs(rho - rho.conj().transpose(0, 2, 1))))
        self.max_herm = max(self.max_herm, herm / float(np.max(np.abs(self.tr0))))
        w = np.linalg.eigvalsh(rho)[:, 0]
        mn = float(np.min(w))
        self.min_eig = min(self.min_eig, mn)
        r = rho[self.cell]
        iu = np.triu_indices(self.d, 1)
        coh = r[iu]
        self.rows.append(
            [t, E_probe, *np.diagonal(r).real, *np.ravel(np.column_stack([coh.real, coh.imag])),
             float(np.trace(r).real), float(w[self.cell])]
        )

    def columns(self) -> list[str]:
        names = [f"c{i + 1}" for i in range(self.n_c)] + [f"v{j + 1}" for j in range(self.d - self.n_c)]
        cols = ["t", "E_probe"] + [f"pop_{n}" for n in names]
        for i, j in zip(*np.triu_indices(self.d, 1)):
            cols += [f"rho_{names[i]}_{names[j]}_re", f"rho_{names[i]}_{names[j]}_im"]
        return cols + ["trace", "min_eig"]


def transmitted_area(E: np.ndarray, dt: float, M: float) -> float:
    """(M/hbar) times the time integral of the analytic-signal envelope."""
    if E.size == 0:
        return 0.0
    return float(M / HBAR * np.sum(np.abs(hilbert(E))) * dt)


def run_scenario(s: Scenario, progress=None) -> RunReport:
    """Run one scenario to completion; structural violations are reported, not raised."""
    if s.field_free:
        return _run_field_free(s)
    t_start = time.perf_counter()
    params = build_medium_params(s)
    spec = build_grid_spec(s)
    medium = BlochMedium(params, s.mode, spec.dt, s.N_b, backend=s.backend or None)
    grid = FieldGrid(spec, medium, s.initial_matrix())
    pulse = build_pulse(s)
    n_steps = s.n_steps or default_steps(s, spec)
    if pulse is not None:
        inject_pulse(grid, pulse.field, max(1, s.n_left // 2), n_steps)
    m0, m1 = spec.medium_range
    probe = m0 + s.probe_cell
    out_cell = m1 + (s.n_right // 2)
    rec = _Recorder(grid.rho, s)
    E_out = np.empty(n_steps)
    E_in = np.empty(n_steps)
    snaps = []
    rec.record(0.0, 0.0, grid.rho)
    for n in range(n_steps):
        yee_step(grid)
        E_out[n] = grid.E[out_cell]
        E_in[n] = grid.E[probe]
        rec.every_step(grid.rho)
        if (n + 1) % s.record_stride == 0 or n + 1 == n_steps:
            rec.record(grid.t, E_in[n], grid.rho)
        if s.snapshot_stride and (n + 1) % s.snapshot_stride == 0:
            snaps.append((n + 1, grid.t, grid.E.copy(), np.append(grid.H, 0.0), grid.P.copy()))
        if progress is not None:
            progress(n + 1, n_steps)
    return _finish(s, rec, E_out, E_in, spec.dt, snaps, t_start, grid.rho)


def _run_field_free(s: Scenario) -> RunReport:
    """Single dot, E = 0, stepped with the same kernel as the coupled run."""
    t_start = time.perf_counter()
    params = build_medium_params(s)
    spec = build_grid_spec(s)
    medium = BlochMedium(params, s.mode, spec.dt, 1.0, backend=s.backend or None)
    rho = np.ascontiguousarray(s.initial_matrix()[None].copy())
    if medium.project:
        rho[:, medium.mask.astype(bool)] = 0.0
    s1 = s.replace(probe_cell=0)
    rec = _Recorder(rho, s1)
    n_steps = s.n_steps or 10_000
    E = np.zeros(1)
    P = np.zeros(1)
    rec.record(0.0, 0.0, rho)
    for n in range(n_steps):
        medium.step(rho, E, P)
        rec.every_step(rho)
        if (n + 1) % s.record_stride == 0 or n + 1 == n_steps:
            rec.record((n + 1) * spec.dt, 0.0, rho)
    return _finish(s1, rec, np.zeros(0), np.zeros(0), spec.dt, [], t_start, rho)


def _finish(s, rec, E_out, E_in, dt, snaps, t_start, rho) -> RunReport:
    data = np.asarray(rec.rows, dtype=float)
    cols = rec.columns()
    probes = {c: data[:, i] for i, c in enumerate(cols)}
    t = probes.pop("t")
    final = rho[s.probe_cell]
    n_c = s.n_c
    summary = {
        "max_inversion": float(rec.max_pop[0]),  # max rho_c11 at the probe cell
        "final_c1": float(final[0, 0].real),
        "initial_c1": float(data[0, 2]),
        "max_deep_valence": float(rec.max_pop[n_c]),  # rho_v11, the deepest valence level
        "min_population": float(np.min(rec.min_pop)),
        "final_min_eig": float(np.min(np.linalg.eigvalsh(rho))),
        "min_eig": float(rec.min_eig),
        "max_trace_drift_step": float(rec.max_step_drift),
        "trace_drift_total": float(np.max(np.abs(np.einsum("nii->n", rho).real - rec.tr0) / np.abs(rec.tr0))),
        "max_hermiticity_defect": float(rec.max_herm),
        "transmitted_area": transmitted_area(E_out, dt, s.dipole),
        "n_steps": int(E_out.size or (len(data) and round(t[-1] / dt))),
        "dt": dt,
    }
    summary["transmitted_area_over_pi"] = summary["transmitted_area"] / np.pi
    summary["psd_violated"] = bool(summary["min_eig"] < -TOL_PSD)
    return RunReport(s, t, probes, summary, E_out, E_in, dt, snaps, time.perf_counter() - t_start)


def sweep(base: Scenario, parameter: str, values, progress=None, workers: int = 1) -> list[RunReport]:
    """Run ``base`` once per value of ``parameter``; ``workers > 1`` runs them in separate processes."""
    if parameter not in SWEEP_PARAMS:
        raise ConfigError(f"sweep parameter must be one of {SWEEP_PARAMS}, got {parameter!r}")
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    scenarios = []
    for v in values:
        v = str(v) if parameter == "mode" else float(v)
        scenarios.append(base.replace(**{parameter: v}, name=f"{base.name}[{parameter}={v}]"))
    if workers == 1 or len(scenarios) < 2:
        return [run_scenario(s, progress) for s in scenarios]
    with ProcessPoolExecutor(max_workers=min(workers, len(scenarios))) as pool:
        return list(pool.map(run_scenario, scenarios))


def manifest(s: Scenario) -> dict:
    spec = build_grid_spec(s)
    pulse = build_pulse(s)
    return {
        "scenario": {k: format_value(v) for k, v in s.to_dict().items()},
        "derived": {
            "dz": spec.dz, "dt": spec.dt, "nz": spec.nz, "courant": spec.courant,
            "omega0": s.omega0, "E0": pulse.E0 if pulse else 0.0,
            "valence_energies_hbar_omega0": list(s.valence_energies()),
        },
        "build": {
            "backend": s.backend or kernels.BACKEND,
            "available_backends": sorted(kernels.BACKENDS),
            "python": platform.python_version(),
            "numpy": np.__version__,
            "platform": platform.platform(),
        },
    }


def write_outputs(report: RunReport, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    s = report.scenario
    with open(os.path.join(out_dir, "manifest"), "w") as fh:
        json.dump(manifest(s), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, "scenario"), "w") as fh:
        fh.write(dump_scenario(s))
    with open(os.path.join(out_dir, "probes.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        cols = ["t"] + list(report.probes)
        w.writerow(cols)
        data = np.column_stack([report.t] + [report.probes[c] for c in cols[1:]])
        for row in data:
            w.writerow([repr(float(x)) for x in row])
    for n, t, E, H, P in report.snapshots:
        with open(os.path.join(out_dir, f"fields_{n:06d}.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["z", "E", "H", "P"])
            dz = build_grid_spec(s).dz
            for j in range(E.size):
                w.writerow([repr(j * dz), repr(float(E[j])), repr(float(H[j])), repr(float(P[j]))])
    with open(os.path.join(out_dir, "summary"), "w") as fh:
        for k, v in report.summary.items():
            fh.write(f"{k} = {format_value(v) if not isinstance(v, bool) else str(v).lower()}\n")


assert set(SWEEP_PARAMS) <= set(FIELD_NAMES)
