# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batched Bloch update.

Same contract as ``qdbloch._fallback.bloch_sweep``.  The Hermitian
eigenproblem of each cell is solved with a cyclic complex Jacobi
iteration, which is fast and exactly structure-preserving for the small
matrices (d <= 8) this package deals with.
"""

from libc.math cimport sqrt, fabs, cos, sin

cdef enum:
    DMAX = 8
    MAX_SWEEPS = 60


cdef inline double cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef int jacobi_hermitian(double complex[DMAX][DMAX] A, double complex[DMAX][DMAX] Q, int d) nogil:
    """Diagonalize A in place (A <- Q^H A Q); Q accumulates the eigenvectors.

    Returns the number of sweeps used, or -1 without convergence.
    """
    cdef int i, j, k, p, q, sweep
    cdef double off, total, r, theta, t, c, s
    cdef double complex e, wpp, wpq, wqp, wqq, akp, akq, apk, aqk
    for i in range(d):
        for j in range(d):
            Q[i][j] = 1.0 if i == j else 0.0
    total = 0.0
    for i in range(d):
        for j in range(d):
            total += cabs2(A[i][j])
    if total == 0.0:
        return 0
    for sweep in range(MAX_SWEEPS):
        off = 0.0
        for p in range(d):
            for q in range(p + 1, d):
                off += cabs2(A[p][q])
        if off <= 1e-34 * total:
            return sweep
        for p in range(d - 1):
            for q in range(p + 1, d):
                r = sqrt(cabs2(A[p][q]))
                if r <= 1e-300:
                    continue
                e = A[p][q] / r
                theta = (A[q][q].real - A[p][p].real) / (2.0 * r)
                if theta >= 0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                # W = diag(1, conj(e)) . [[c, s], [-s, c]] in the (p, q) plane
                wpp = c
                wpq = s
                wqp = -s * e.conjugate()
                wqq = c * e.conjugate()
                for k in range(d):
                    akp = A[k][p]
                    akq = A[k][q]
                    A[k][p] = akp * wpp + akq * wqp
                    A[k][q] = akp * wpq + akq * wqq
                for k in range(d):
                    apk = A[p][k]
                    aqk = A[q][k]
                    A[p][k] = wpp.conjugate() * apk + wqp.conjugate() * aqk
                    A[q][k] = wpq.conjugate() * apk + wqq.conjugate() * aqk
                A[p][q] = 0.0
                A[q][p] = 0.0
                A[p][p] = A[p][p].real
                A[q][q] = A[q][q].real
                for k in range(d):
                    akp = Q[k][p]
                    akq = Q[k][q]
                    Q[k][p] = akp * wpp + akq * wqp
                    Q[k][q] = akp * wpq + akq * wqq
    return -1


def bloch_sweep(double complex[:, :, ::1] rho, const double[::1] E, const double complex[:, ::1] H0,
                const double complex[:, ::1] M, const double complex[:, ::1] K, double dt_over_hbar,
                const unsigned char[:, ::1] mask, bint project, double Nb, double[::1] P_out):
    cdef Py_ssize_t n = rho.shape[0]
    cdef int d = <int>rho.shape[1]
    cdef Py_ssize_t cell
    cdef int i, j, k, l, a, b, status = 0
    cdef double complex V[DMAX][DMAX]
    cdef double complex Q[DMAX][DMAX]
    cdef double complex U[DMAX][DMAX]
    cdef double complex T[DMAX][DMAX]
    cdef double complex ph[DMAX]
    cdef double complex acc
    cdef double lam, tr
    if d > DMAX:
        raise ValueError("compiled kernel supports at most 8 levels")
    with nogil:
        for cell in range(n):
            # V = H0 + E M + K vec(rho), scaled by dt / hbar
            for a in range(d):
                for b in range(d):
                    acc = H0[a, b] + E[cell] * M[a, b]
                    for k in range(d):
                        for l in range(d):
                            acc = acc + K[a * d + b, k * d + l] * rho[cell, k, l]
                    V[a][b] = acc * dt_over_hbar
            # enforce exact Hermiticity before diagonalizing
            for a in range(d):
                V[a][a] = V[a][a].real
                for b in range(a + 1, d):
                    acc = 0.5 * (V[a][b] + V[b][a].conjugate())
                    V[a][b] = acc
                    V[b][a] = acc.conjugate()
            if jacobi_hermitian(V, Q, d) < 0:
                status = 1
                break
            for k in range(d):
                lam = V[k][k].real
                ph[k] = cos(lam) - 1j * sin(lam)
            # U = Q diag(ph) Q^H
            for i in range(d):
                for j in range(d):
                    acc = 0.0
                    for k in range(d):
                        acc = acc + Q[i][k] * ph[k] * Q[j][k].conjugate()
                    U[i][j] = acc
            # T = U rho
            for i in range(d):
                for j in range(d):
                    acc = 0.0
                    for k in range(d):
                        acc = acc + U[i][k] * rho[cell, k, j]
                    T[i][j] = acc
            # rho = T U^H, Hermitian part only
            for i in range(d):
                for j in range(i, d):
                    acc = 0.0
                    for k in range(d):
                        acc = acc + T[i][k] * U[j][k].conjugate()
                    V[i][j] = acc
            for i in range(d):
                rho[cell, i, i] = V[i][i].real
                for j in range(i + 1, d):
                    acc = V[i][j]
                    if project and mask[i, j]:
                        acc = 0.0
                    rho[cell, i, j] = acc
                    rho[cell, j, i] = acc.conjugate()
            tr = 0.0
            for i in range(d):
                for j in range(d):
                    tr += (M[i, j] * rho[cell, j, i]).real
            P_out[cell] = Nb * tr
    if status:
        from qdbloch.errors import ConvergenceFailure
        raise ConvergenceFailure("Jacobi eigensolver did not converge")
