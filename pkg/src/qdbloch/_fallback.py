"""Pure-numpy batched Bloch update, used when the compiled kernel is unavailable."""

import numpy as np


def bloch_sweep(rho, E, H0, M, K, dt_over_hbar, mask, project, Nb, P_out):
    """Advance every cell's density matrix by one frozen-coefficient step, in place.

    rho: (n, d, d) complex, E: (n,) real field per cell, H0: (d, d) constant
    part of V, M: (d, d) dipole matrix on the field axis, K: (d*d, d*d) linear
    Coulomb map acting on row-major vec(rho).  Writes N_b Re Tr(M rho) of the
    updated state into P_out.
    """
    n, d, _ = rho.shape
    if n == 0:
        return
    V = H0 + E[:, None, None] * M + (rho.reshape(n, d * d) @ K.T).reshape(n, d, d)
    w, W = np.linalg.eigh(dt_over_hbar * V)
    U = (W * np.exp(-1j * w)[:, None, :]) @ W.conj().transpose(0, 2, 1)
    out = U @ rho @ U.conj().transpose(0, 2, 1)
    out = 0.5 * (out + out.conj().transpose(0, 2, 1))
    if project:
        out[:, mask.astype(bool)] = 0.0
    rho[...] = out
    P_out[:] = Nb * np.einsum("ij,nji->n", M, rho).real
