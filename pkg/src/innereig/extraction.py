"""Search-subspace bookkeeping and the three eigenpair extraction strategies.

The state keeps an orthonormal basis V, the cached product W = (A - sigma I)V
and the two projections H = W^H V and G = W^H W, updated incrementally by one
column per expansion (O(n m) work). Extractions are read-only over the state.

All three strategies report as eigenvalue estimate the Rayleigh quotient of
the vector they return, so the residual r = A y - rho y is orthogonal to y;
the residual is always recomputed with a fresh product of A, never from the
cache, so logged norms match an independent recomputation to rounding.
"""

from dataclasses import dataclass

import numpy as np

from . import dense


@dataclass
class Extraction:
    """One outer step's approximate eigenpair and its surroundings.

    harmonic_values holds every value of the projected problem (harmonic
    values for the harmonic extractions, Ritz values for the standard one)
    sorted by distance from the target; the adaptive tolerance rule consumes
    them.
    """
    rho: complex
    y: np.ndarray
    coeffs: np.ndarray
    residual: np.ndarray
    residual_norm: float
    harmonic_values: np.ndarray
    kind: str


class SubspaceState:
    """Orthonormal basis with incrementally maintained projections."""

    def __init__(self, A, sigma, V0, capacity=None):
        V0 = np.asarray(V0, dtype=np.complex128)
        if V0.ndim == 1:
            V0 = V0[:, None]
        n, m = V0.shape
        if capacity is None:
            capacity = max(m, 32)
        self.n = n
        self.sigma = complex(sigma)
        self.capacity = int(capacity)
        self._V = np.zeros((n, self.capacity), dtype=np.complex128)
        self._W = np.zeros((n, self.capacity), dtype=np.complex128)
        self._H = np.zeros((self.capacity, self.capacity), dtype=np.complex128)
        self._G = np.zeros((self.capacity, self.capacity), dtype=np.complex128)
        self.m = 0
        for k in range(m):
            self._append(A, V0[:, k])

    @property
    def V(self):
        return self._V[:, :self.m]

    @property
    def W(self):
        return self._W[:, :self.m]

    @property
    def H(self):
        return self._H[:self.m, :self.m]

    @property
    def G(self):
        return self._G[:self.m, :self.m]

    def _append(self, A, v):
        m = self.m
        if m >= self.capacity:
            raise ValueError("subspace at capacity; restart instead")
        w = A.shifted_matvec(self.sigma, v).astype(np.complex128)
        self._V[:, m] = v
        self._W[:, m] = w
        # H = W^H V: new column from all w's against v, new row from w against V
        self._H[:m + 1, m] = self._W[:, :m + 1].conj().T @ v
        self._H[m, :m] = w.conj() @ self._V[:, :m]
        # G = W^H W, kept Hermitian explicitly
        col = self._W[:, :m + 1].conj().T @ w
        self._G[:m + 1, m] = col
        self._G[m, :m] = np.conj(col[:m])
        self._G[m, m] = col[m].real
        self.m = m + 1

    def expand(self, A, v_new):
        """Append an (already orthonormalized) basis vector."""
        self._append(A, v_new)

    def orthonormality_defect(self):
        """||V^H V - I||_F, a debugging aid."""
        Vv = self.V
        return float(np.linalg.norm(Vv.conj().T @ Vv - np.eye(self.m)))


def _fix_phase(z):
    """Scale so the largest-magnitude coefficient is real positive."""
    k = int(np.argmax(np.abs(z)))
    piv = z[k]
    if piv == 0.0:
        return z
    return z * (np.conj(piv) / abs(piv))


def _finish(state, A, rho, z, values, kind):
    z = _fix_phase(z)
    y = state.V @ z
    scale = np.linalg.norm(y)
    y = y / scale
    z = z / scale
    r = A.matvec(y) - rho * y
    return Extraction(rho=complex(rho), y=y, coeffs=z, residual=r,
                      residual_norm=float(np.linalg.norm(r)),
                      harmonic_values=values, kind=kind)


def _rayleigh(state, z):
    """z^H H^H z + sigma, the Rayleigh quotient of V z for unit z."""
    return complex(np.vdot(z, state.H.conj().T @ z) + state.sigma)


def extract_standard(state, A):
    """Rayleigh-Ritz: eigenpairs of H^H, pick the value closest to the target."""
    mu, Z = dense.eig_general(state.H.conj().T)
    order = np.lexsort((np.angle(mu), np.abs(mu)))
    mu, Z = mu[order], Z[:, order]
    z = Z[:, 0]
    rho = _rayleigh(state, z)
    return _finish(state, A, rho, z, mu + state.sigma, "standard")


def extract_harmonic(state, A):
    """Harmonic extraction through the pencil (H, G).

    The eigenvalue estimate is the Rayleigh quotient of the harmonic vector
    rather than the harmonic value itself, which stays reliable even when
    the target sits very close to an eigenvalue.
    """
    mu, Z = dense.pencil_eig(state.H, state.G)
    if mu.shape[0] == 0:
        raise dense.NoConvergence("all harmonic values infinite")
    z = Z[:, 0]
    rho = _rayleigh(state, z)
    return _finish(state, A, rho, z, mu + state.sigma, "harmonic")


def refined_cross_matrix(state, rho):
    """V^H (A - rho I)^H (A - rho I) V assembled from the cached projections.

    With d = sigma - rho this is G + conj(d) H^H + d H + |d|^2 I; for
    rho = sigma it reduces to G exactly.
    """
    d = state.sigma - complex(rho)
    Hm = state.H
    S = state.G + np.conj(d) * Hm.conj().T + d * Hm \
        + (abs(d) ** 2) * np.eye(state.m)
    return (S + S.conj().T) / 2.0


def extract_refined_harmonic(state, A, approach="I"):
    """Refined harmonic extraction.

    First the harmonic Rayleigh quotient rho is computed, then the unit
    vector in the subspace minimizing ||(A - rho I) w||. Approach I finds it
    as the smallest eigenvector of the cross-product matrix assembled from
    the cached projections; approach II takes the smallest right singular
    vector of the explicitly formed n-by-m matrix (A - rho I) V via thin QR.
    The reported eigenvalue is the Rayleigh quotient of the refined vector.
    """
    mu, Z = dense.pencil_eig(state.H, state.G)
    if mu.shape[0] == 0:
        raise dense.NoConvergence("all harmonic values infinite")
    rho = _rayleigh(state, Z[:, 0])
    d = state.sigma - rho
    if approach == "I":
        _, zhat = dense.eig_hermitian_smallest(refined_cross_matrix(state, rho))
    elif approach == "II":
        B = state.W + d * state.V
        _, zhat = dense.smallest_singular_triplet_qr(B)
    else:
        raise ValueError(f"unknown approach {approach!r}")
    rho_hat = _rayleigh(state, zhat)
    return _finish(state, A, rho_hat, zhat, mu + state.sigma,
                   "refined-harmonic")
