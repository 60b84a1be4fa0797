"""Compiled hot loops: CSR products, sparse triangular solves, dense Jacobi.

All loops are plain sequential code (no fastmath, no threading) so results
are deterministic and accumulation order is fixed row-major / index order.
If numba is unavailable the same loops run interpreted, slower but identical.
"""

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - degraded interpreter-only mode
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


@njit(cache=True)
def csr_matvec(indptr, indices, data, x, out):
    """out = A @ x for CSR A. out must be zero-filled with the result dtype."""
    n = indptr.shape[0] - 1
    for i in range(n):
        s = out[i]
        for k in range(indptr[i], indptr[i + 1]):
            s = s + data[k] * x[indices[k]]
        out[i] = s


@njit(cache=True)
def csr_lower_unit_solve(indptr, indices, data, x):
    """Solve L y = x in place, L unit lower triangular stored as strict rows."""
    n = indptr.shape[0] - 1
    for i in range(n):
        s = x[i]
        for k in range(indptr[i], indptr[i + 1]):
            s = s - data[k] * x[indices[k]]
        x[i] = s


@njit(cache=True)
def csr_upper_solve(indptr, indices, data, diag, x):
    """Solve U y = x in place, U upper triangular: strict rows plus diag array."""
    n = indptr.shape[0] - 1
    for i in range(n - 1, -1, -1):
        s = x[i]
        for k in range(indptr[i], indptr[i + 1]):
            s = s - data[k] * x[indices[k]]
        x[i] = s / diag[i]


@njit(cache=True)
def hermitian_jacobi(S, Q, max_sweeps, tol_off):
    """Cyclic Jacobi diagonalization of Hermitian S, in place.

    Q (preset to identity) accumulates the eigenvector matrix; on return
    diag(S) holds the eigenvalues. Returns the number of sweeps used, or -1
    if the off-diagonal Frobenius norm is still above tol_off after
    max_sweeps sweeps.
    """
    m = S.shape[0]
    if m == 1:
        return 0
    skip = tol_off / (2.0 * m)
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(m - 1):
            for j in range(i + 1, m):
                off += S[i, j].real ** 2 + S[i, j].imag ** 2
        off = np.sqrt(2.0 * off)
        if off <= tol_off:
            return sweep
        for p in range(m - 1):
            for q in range(p + 1, m):
                g = np.abs(S[p, q])
                if g <= skip:
                    S[p, q] = 0.0
                    S[q, p] = 0.0
                    continue
                alpha = S[p, p].real
                beta = S[q, q].real
                phase = S[p, q] / g
                tau = (beta - alpha) / (2.0 * g)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                sph = s * phase
                sphc = s * np.conj(phase)
                # columns: N = S J
                for k in range(m):
                    skp = S[k, p]
                    skq = S[k, q]
                    S[k, p] = c * skp - sphc * skq
                    S[k, q] = sph * skp + c * skq
                # rows: J^H N
                for k in range(m):
                    spk = S[p, k]
                    sqk = S[q, k]
                    S[p, k] = c * spk - sph * sqk
                    S[q, k] = sphc * spk + c * sqk
                S[p, q] = 0.0
                S[q, p] = 0.0
                S[p, p] = S[p, p].real + 0.0j
                S[q, q] = S[q, q].real + 0.0j
                for k in range(m):
                    qkp = Q[k, p]
                    qkq = Q[k, q]
                    Q[k, p] = c * qkp - sphc * qkq
                    Q[k, q] = sph * qkp + c * qkq
    off = 0.0
    for i in range(m - 1):
        for j in range(i + 1, m):
            off += S[i, j].real ** 2 + S[i, j].imag ** 2
    off = np.sqrt(2.0 * off)
    if off <= tol_off:
        return max_sweeps
    return -1
