"""Compare the compiled and numpy implementations of the batched Bloch update.

    python benchmarks/bench_kernels.py [--cells 50 200 800] [--repeat 200]
"""

import argparse
import time

import numpy as np

from qdbloch import kernels
from qdbloch.constants import HBAR
from qdbloch.coulomb import FULL, coulomb_linear_map, make_synthetic_tensor
from qdbloch.hamiltonian import DipoleMatrices, FreeEnergies
from qdbloch.state import LevelLayout


def setup(n_cells, n_v=2, seed=0):
    layout = LevelLayout(1, n_v)
    w0 = 2 * np.pi * 1e14
    F = FreeEnergies([HBAR * w0], [-2 * HBAR * w0 * (n_v - 1 - j) for j in range(n_v)])
    M = DipoleMatrices.scalar([[0.0]], 1e-29 * (1 - np.eye(n_v)), 1e-29 * np.ones((1, n_v)))
    R = make_synthetic_tensor(layout, 3e-21, seed)
    T, C = coulomb_linear_map(R, FULL)
    d = layout.d
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=(n_cells, d)) + 1j * rng.normal(size=(n_cells, d))
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    rho = np.ascontiguousarray(np.einsum("ni,nj->nij", psi, psi.conj()))
    return dict(
        rho=rho,
        E=rng.normal(scale=1e8, size=n_cells),
        H0=np.ascontiguousarray(F.matrix() + C),
        M=np.ascontiguousarray(M.along(0)),
        K=np.ascontiguousarray(T.reshape(d * d, d * d)),
        dt_over_hbar=2.5e-16 / HBAR,
        mask=layout.intraband_mask().astype(np.uint8),
    )


def time_backend(fn, data, repeat):
    rho = data["rho"].copy()
    P = np.zeros(rho.shape[0])
    args = (data["E"], data["H0"], data["M"], data["K"], data["dt_over_hbar"], data["mask"], False, 1e24, P)
    fn(rho, *args)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(rho, *args)
    return (time.perf_counter() - t0) / repeat, rho


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cells", type=int, nargs="+", default=[50, 200, 800])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    names = sorted(kernels.BACKENDS)
    print(f"backends: {', '.join(names)} (default {kernels.BACKEND})")
    print(f"{'cells':>6} " + " ".join(f"{n + ' us/step':>16}" for n in names) + f" {'speedup':>8} {'max diff':>10}")
    for n in args.cells:
        data = setup(n)
        res = {name: time_backend(kernels.BACKENDS[name], data, args.repeat) for name in names}
        line = f"{n:>6} " + " ".join(f"{res[name][0] * 1e6:>16.1f}" for name in names)
        if "cython" in res:
            speed = res["numpy"][0] / res["cython"][0]
            diff = float(np.max(np.abs(res["numpy"][1] - res["cython"][1])))
            line += f" {speed:>8.2f} {diff:>10.2e}"
        print(line)


if __name__ == "__main__":
    main()
