"""Small dense kernels for the projected problems (dimension <= 64).

Includes Gram-Schmidt orthonormalization with iterative refinement, a
tolerance-aware Cholesky, the pencil eigensolver used by the harmonic
extraction, a cyclic-Jacobi Hermitian eigensolver (chosen for relative
accuracy of tiny eigenvalues), and a QR+SVD smallest-singular-triplet
routine. The general dense eigensolve is delegated to LAPACK via numpy.
"""

import logging

import numpy as np

from . import _kernels

logger = logging.getLogger(__name__)

_EPS = np.finfo(np.float64).eps


class DeflatedSubspace(Exception):
    """The candidate expansion vector lies (numerically) in span(V)."""


class NotPositiveDefinite(Exception):
    """A Cholesky pivot fell below tolerance; the Gram matrix is rank deficient."""


class NoConvergence(Exception):
    """An iterative dense eigensolve did not converge."""


def orthonormalize_against(V, u, deflation_tol=None):
    """Orthonormalize u against the orthonormal columns of V.

    Modified Gram-Schmidt with one refinement pass. Returns (v, norm_before)
    where norm_before is the norm of the projected residual prior to
    normalization. Raises DeflatedSubspace when that residual is at noise
    level (below n*eps*||u||, or deflation_tol if given).
    """
    u = np.asarray(u)
    w = u.astype(np.complex128, copy=True)
    unorm = np.linalg.norm(w)
    if deflation_tol is None:
        deflation_tol = u.shape[0] * _EPS * unorm
    if unorm == 0.0:
        raise DeflatedSubspace("zero expansion vector")
    m = V.shape[1] if V.ndim == 2 else 0
    for _ in range(2):
        for i in range(m):
            w -= np.vdot(V[:, i], w) * V[:, i]
    norm_before = np.linalg.norm(w)
    if norm_before <= deflation_tol:
        raise DeflatedSubspace(
            f"projected residual {norm_before:.3e} below {deflation_tol:.3e}")
    return w / norm_before, float(norm_before)


def cholesky(G):
    """Lower-triangular L with L L^H = G for Hermitian positive definite G.

    Raises NotPositiveDefinite when a pivot drops to m*eps times the largest
    diagonal entry, signalling numerical rank deficiency.
    """
    G = np.asarray(G, dtype=np.complex128)
    m = G.shape[0]
    L = np.zeros_like(G)
    base = max(float(np.max(np.abs(np.diagonal(G).real))), 0.0)
    pivot_tol = m * _EPS * base
    for j in range(m):
        if j:
            col = G[j:, j] - L[j:, :j] @ np.conj(L[j, :j])
        else:
            col = G[j:, j].copy()
        d = col[0].real
        if d <= pivot_tol:
            raise NotPositiveDefinite(f"pivot {d:.3e} at column {j}")
        root = np.sqrt(d)
        L[j, j] = root
        L[j + 1:, j] = col[1:] / root
    return L


def solve_lower(L, B):
    """Solve L X = B, L lower triangular, B matrix or vector (copy returned)."""
    X = np.array(B, dtype=np.complex128, copy=True)
    vec = X.ndim == 1
    if vec:
        X = X[:, None]
    m = L.shape[0]
    for j in range(m):
        X[j] /= L[j, j]
        if j + 1 < m:
            X[j + 1:] -= np.outer(L[j + 1:, j], X[j])
    return X[:, 0] if vec else X


def solve_conj_upper(L, b):
    """Solve L^H z = b by back substitution (L lower triangular)."""
    m = L.shape[0]
    z = np.array(b, dtype=np.complex128, copy=True)
    for i in range(m - 1, -1, -1):
        if i + 1 < m:
            z[i] -= np.vdot(L[i + 1:, i], z[i + 1:])
        z[i] /= np.conj(L[i, i])
    return z


def eig_general(T, max_dim=64):
    """All eigenpairs of a small dense matrix, eigenvectors unit-normalized.

    Returns (values, vectors) with vectors as columns. LAPACK-backed; a
    LAPACK convergence failure surfaces as NoConvergence.
    """
    T = np.asarray(T)
    m = T.shape[0]
    if m > max_dim:
        raise ValueError(f"dense eigensolve limited to {max_dim}, got {m}")
    try:
        w, Z = np.linalg.eig(T.astype(np.complex128))
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    Z = Z / np.linalg.norm(Z, axis=0, keepdims=True)
    return w, Z


def pencil_eig(H, G):
    """Eigenpairs (mu, z) of H z = (1/mu) G z with G Hermitian positive definite.

    Reduced through G = L L^H to a standard eigenproblem of L^-1 H L^-H in
    theta = 1/mu; z = L^-H w renormalized. Pairs with theta = 0 (infinite mu)
    are dropped. Sorted by |mu| ascending, ties by ascending arg(mu).
    """
    H = np.asarray(H, dtype=np.complex128)
    G = np.asarray(G, dtype=np.complex128)
    m = H.shape[0]
    if m == 1:
        h = H[0, 0]
        g = G[0, 0].real
        if g <= 0.0:
            raise NotPositiveDefinite(f"pivot {g:.3e} at column 0")
        if abs(h) <= _EPS * abs(g):
            return np.empty(0, dtype=np.complex128), np.empty((1, 0), dtype=np.complex128)
        return np.array([g / h]), np.array([[1.0 + 0.0j]])
    L = cholesky(G)
    Y = solve_lower(L, H)
    T = solve_lower(L, Y.conj().T).conj().T
    theta, Wv = eig_general(T)
    keep = np.abs(theta) > m * _EPS * np.linalg.norm(T, ord="fro")
    dropped = int(np.sum(~keep))
    if dropped:
        logger.debug("pencil_eig: dropped %d infinite pair(s)", dropped)
    theta, Wv = theta[keep], Wv[:, keep]
    mu = 1.0 / theta
    Z = np.empty((m, mu.shape[0]), dtype=np.complex128)
    for k in range(mu.shape[0]):
        z = solve_conj_upper(L, Wv[:, k])
        Z[:, k] = z / np.linalg.norm(z)
    order = np.lexsort((np.angle(mu), np.abs(mu)))
    return mu[order], Z[:, order]


def eig_hermitian_smallest(S, max_sweeps=30):
    """Smallest eigenpair of Hermitian S via cyclic Jacobi.

    Returns (theta_min, unit eigenvector). Raises NoConvergence if the
    off-diagonal mass has not reached noise level after max_sweeps sweeps.
    """
    S = np.asarray(S)
    m = S.shape[0]
    A = S.astype(np.complex128, copy=True)
    Q = np.eye(m, dtype=np.complex128)
    fro = np.linalg.norm(A, ord="fro")
    if fro == 0.0:
        e = np.zeros(m, dtype=np.complex128)
        e[0] = 1.0
        return 0.0, e
    sweeps = _kernels.hermitian_jacobi(A, Q, max_sweeps, 1e-13 * fro)
    if sweeps < 0:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    d = np.diagonal(A).real
    k = int(np.argmin(d))
    v = Q[:, k]
    return float(d[k]), v / np.linalg.norm(v)


def thin_qr(W):
    """Thin QR by modified Gram-Schmidt with one refinement pass.

    Rank-deficient columns get a replacement direction so Q always has
    orthonormal columns; the corresponding R column keeps its (tiny) norm.
    """
    W = np.asarray(W, dtype=np.complex128)
    n, m = W.shape
    Q = np.zeros((n, m), dtype=np.complex128)
    R = np.zeros((m, m), dtype=np.complex128)
    for j in range(m):
        w = W[:, j].copy()
        for _ in range(2):
            for i in range(j):
                h = np.vdot(Q[:, i], w)
                R[i, j] += h
                w -= h * Q[:, i]
        nrm = np.linalg.norm(w)
        R[j, j] = nrm
        if nrm > n * _EPS * max(np.linalg.norm(W[:, j]), 1e-300):
            Q[:, j] = w / nrm
        else:
            # dead column: park an arbitrary direction orthogonal to the rest
            for k in range(n):
                cand = np.zeros(n, dtype=np.complex128)
                cand[k] = 1.0
                for _ in range(2):
                    for i in range(j):
                        cand -= np.vdot(Q[:, i], cand) * Q[:, i]
                cnrm = np.linalg.norm(cand)
                if cnrm > 0.5:
                    Q[:, j] = cand / cnrm
                    break
            R[j, j] = 0.0
    return Q, R


def smallest_singular_triplet_qr(W):
    """(sigma_min, right singular vector) of tall W via thin QR then SVD of R."""
    W = np.asarray(W)
    n, m = W.shape
    if n < m:
        raise ValueError(f"need n >= m, got {n} < {m}")
    _, R = thin_qr(W)
    _, s, Vh = np.linalg.svd(R)
    sigma_min = float(s[-1])
    z = Vh[-1].conj()
    if s[0] > 0 and sigma_min < n * _EPS * s[0]:
        logger.debug("smallest_singular_triplet_qr: numerically rank deficient "
                     "(sigma_min=%.3e, sigma_max=%.3e)", sigma_min, s[0])
    return sigma_min, z / np.linalg.norm(z)
