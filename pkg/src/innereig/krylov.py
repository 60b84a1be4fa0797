"""Right-preconditioned restarted GMRES over matrix-free operators.

The Arnoldi basis is built with modified Gram-Schmidt plus a refinement
pass when cancellation is detected. Convergence is always certified with a
true residual b - op(x), never the recurrence alone. The reported iteration
count is the number of Arnoldi steps (one operator application each);
residual-certification products are not counted, matching the usual
reported-iteration convention of restarted GMRES implementations.
"""

from dataclasses import dataclass, field

import numpy as np

_EPS = np.finfo(np.float64).eps


class LinearOperator:
    """Matrix-free square operator: a dimension and an apply callable."""

    def __init__(self, n, apply_fn):
        self.n = n
        self._apply = apply_fn

    def apply(self, x):
        return self._apply(x)


def make_sira_operator(A, sigma):
    """v -> (A - sigma I) v."""
    return LinearOperator(A.n, lambda v: A.shifted_matvec(sigma, v))


def make_jd_operator(A, sigma, y):
    """v -> (I - y y^H)(A - sigma I)(I - y y^H) v for unit y."""
    y = np.asarray(y, dtype=np.complex128)
    y = y / np.linalg.norm(y)

    def apply(v):
        t = v - np.vdot(y, v) * y
        t = A.shifted_matvec(sigma, t)
        return t - np.vdot(y, t) * y

    return LinearOperator(A.n, apply)


@dataclass
class GmresOutcome:
    solution: np.ndarray
    achieved_rel_residual: float
    iterations: int
    converged: bool
    restart_residuals: list = field(default_factory=list)
    stagnated: bool = False


def _givens(a, b):
    """c (real), s with [c, s; -conj(s), c] @ [a, b] = [r, 0]."""
    if b == 0.0:
        return 1.0, 0.0 + 0.0j
    if a == 0.0:
        return 0.0, np.conj(b) / abs(b)
    t = np.hypot(abs(a), abs(b))
    c = abs(a) / t
    s = (a / abs(a)) * np.conj(b) / t
    return c, s


def _back_substitute(R, g):
    m = g.shape[0]
    y = np.array(g, dtype=np.complex128, copy=True)
    for i in range(m - 1, -1, -1):
        if i + 1 < m:
            y[i] -= R[i, i + 1:] @ y[i + 1:]
        y[i] = y[i] / R[i, i] if R[i, i] != 0.0 else 0.0
    return y


def gmres(op, b, eps, m_inv=None, restart=30, max_iters=1000):
    """Solve op(x) = b to relative residual eps with restarted GMRES(restart).

    Zero initial guess. m_inv, when given, is applied as a right
    preconditioner: the Krylov space is built on op o m_inv and the final
    solution is mapped back through m_inv. On hitting max_iters or on
    stagnation (a full cycle without true-residual improvement) the best
    iterate seen is returned with converged=False unless it already meets
    eps.
    """
    b = np.asarray(b, dtype=np.complex128)
    n = b.shape[0]
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return GmresOutcome(np.zeros(n, dtype=np.complex128), 0.0, 0, True)
    target = eps * bnorm

    x = np.zeros(n, dtype=np.complex128)
    r = b.copy()
    rnorm = bnorm
    iters = 0
    best_x, best_rnorm = None, np.inf
    restart_residuals = []
    converged = False
    stagnated = False

    while not converged and iters < max_iters:
        cycle_start = rnorm
        V = np.empty((n, restart + 1), dtype=np.complex128)
        H = np.zeros((restart + 1, restart), dtype=np.complex128)
        cs = np.zeros(restart)
        sn = np.zeros(restart, dtype=np.complex128)
        g = np.zeros(restart + 1, dtype=np.complex128)
        V[:, 0] = r / rnorm
        g[0] = rnorm
        j = 0
        check_bar = np.inf
        cycle_done = False
        while not cycle_done:
            z = m_inv(V[:, j]) if m_inv is not None else V[:, j]
            w = np.asarray(op.apply(z), dtype=np.complex128)
            iters += 1
            wnorm0 = float(np.linalg.norm(w))
            for i in range(j + 1):
                h = np.vdot(V[:, i], w)
                H[i, j] += h
                w = w - h * V[:, i]
            wnorm = float(np.linalg.norm(w))
            if wnorm < wnorm0 / 100.0:
                for i in range(j + 1):
                    h = np.vdot(V[:, i], w)
                    H[i, j] += h
                    w = w - h * V[:, i]
                wnorm = float(np.linalg.norm(w))
            H[j + 1, j] = wnorm
            happy = wnorm <= 100.0 * _EPS * wnorm0
            if not happy:
                V[:, j + 1] = w / wnorm
            for i in range(j):
                hi = H[i, j]
                H[i, j] = cs[i] * hi + sn[i] * H[i + 1, j]
                H[i + 1, j] = -np.conj(sn[i]) * hi + cs[i] * H[i + 1, j]
            c, s = _givens(H[j, j], H[j + 1, j])
            cs[j], sn[j] = c, s
            H[j, j] = c * H[j, j] + s * H[j + 1, j]
            H[j + 1, j] = 0.0
            g[j + 1] = -np.conj(s) * g[j]
            g[j] = c * g[j]
            rec_res = abs(g[j + 1])
            j += 1
            boundary = happy or j == restart or iters >= max_iters
            if boundary or (rec_res <= target and rec_res <= check_bar):
                y = _back_substitute(H[:j, :j], g[:j])
                u = V[:, :j] @ y
                xc = x + (m_inv(u) if m_inv is not None else u)
                rc = b - np.asarray(op.apply(xc), dtype=np.complex128)
                rcnorm = float(np.linalg.norm(rc))
                if rcnorm < best_rnorm:
                    best_x, best_rnorm = xc, rcnorm
                if rcnorm <= target:
                    x, r, rnorm = xc, rc, rcnorm
                    converged = True
                    cycle_done = True
                elif boundary:
                    x, r, rnorm = xc, rc, rcnorm
                    cycle_done = True
                else:
                    # recurrence converged but the true residual disagrees;
                    # keep expanding, re-check after real progress only
                    check_bar = rec_res / 4.0
        restart_residuals.append(rnorm / bnorm)
        if not converged and rnorm >= cycle_start * (1.0 - 1e-12):
            stagnated = True
            break

    if converged:
        sol, achieved = x, rnorm / bnorm
    elif best_x is not None:
        sol, achieved = best_x, best_rnorm / bnorm
    else:
        sol, achieved = x, rnorm / bnorm
    return GmresOutcome(sol, float(achieved), iters, achieved <= eps,
                        restart_residuals, stagnated)
