"""Threshold incomplete LU of A - sigma*I and the projected variant for
correction equations.

Row-wise ILUT without pivoting: while eliminating row i, any computed entry
with magnitude below drop_tol times the 2-norm of row i of A - sigma*I is
discarded; the diagonal is never dropped. A vanishing pivot is patched with
a small multiple of the row norm (counted, never fatal). Factors are stored
complex so a real matrix with a complex target needs no special casing.
"""

import heapq
import logging

import numpy as np

from . import _kernels

logger = logging.getLogger(__name__)

_EPS = np.finfo(np.float64).eps


class IlutFactors:
    """Unit-lower L and upper U rows approximating A - sigma*I.

    solve() applies (LU)^-1 by forward/back substitution.
    """

    def __init__(self, n, L_ptr, L_idx, L_val, U_ptr, U_idx, U_val, U_diag,
                 drop_tol, fill_cap, pivot_patches):
        self.n = n
        self.L_ptr, self.L_idx, self.L_val = L_ptr, L_idx, L_val
        self.U_ptr, self.U_idx, self.U_val = U_ptr, U_idx, U_val
        self.U_diag = U_diag
        self.drop_tol = drop_tol
        self.fill_cap = fill_cap
        self.pivot_patches = pivot_patches

    @property
    def nnz_lower(self):
        return int(self.L_idx.shape[0])

    @property
    def nnz_upper(self):
        # strict upper entries plus the always-present diagonal
        return int(self.U_idx.shape[0]) + self.n

    def solve(self, b):
        """x with L U x = b."""
        b = np.asarray(b)
        if b.shape != (self.n,):
            raise ValueError(f"vector length {b.shape} does not match n={self.n}")
        x = b.astype(np.complex128, copy=True)
        _kernels.csr_lower_unit_solve(self.L_ptr, self.L_idx, self.L_val, x)
        _kernels.csr_upper_solve(self.U_ptr, self.U_idx, self.U_val,
                                 self.U_diag, x)
        if not np.all(np.isfinite(x)):
            raise FloatingPointError("preconditioner solve produced non-finite values")
        return x


def _freeze_rows(n, rows):
    ptr = np.zeros(n + 1, dtype=np.int64)
    for i, (cols, _) in enumerate(rows):
        ptr[i + 1] = ptr[i] + len(cols)
    idx = np.empty(ptr[-1], dtype=np.int64)
    val = np.empty(ptr[-1], dtype=np.complex128)
    for i, (cols, vals) in enumerate(rows):
        idx[ptr[i]:ptr[i + 1]] = cols
        val[ptr[i]:ptr[i + 1]] = vals
    return ptr, idx, val


def _cap(entries, cap):
    """Keep the cap largest-magnitude (col, val) pairs."""
    if cap is None or len(entries) <= cap:
        return entries
    entries = sorted(entries, key=lambda cv: abs(cv[1]), reverse=True)[:int(cap)]
    return entries


def ilut_factorize(A, sigma, drop_tol, fill_cap=None, pivot_patch=True):
    """Row-wise ILUT of A - sigma*I.

    fill_cap limits kept entries per row per factor (strict triangle counts,
    diagonal always kept); scalar or per-row array, default unbounded.
    With drop_tol=0 and no cap the factorization is exact LU.
    """
    if drop_tol < 0:
        raise ValueError("drop_tol must be >= 0")
    n = A.n
    sigma = complex(sigma)
    caps = None
    if fill_cap is not None:
        caps = np.broadcast_to(np.asarray(fill_cap, dtype=np.int64), (n,))

    L_rows = []
    U_rows = []
    U_diag = np.empty(n, dtype=np.complex128)
    patches = 0

    for i in range(n):
        cols, vals = A.row(i)
        w = {}
        for j, v in zip(cols.tolist(), vals.tolist()):
            w[j] = complex(v)
        w[i] = w.get(i, 0.0) - sigma
        rownorm = np.sqrt(sum(v.real * v.real + v.imag * v.imag
                              for v in w.values()))
        tau = drop_tol * rownorm

        heap = [j for j in w if j < i]
        heapq.heapify(heap)
        while heap:
            k = heapq.heappop(heap)
            lik = w[k] / U_diag[k]
            if abs(lik) < tau:
                del w[k]
                continue
            w[k] = lik
            ucols, uvals = U_rows[k]
            for j, uv in zip(ucols, uvals):
                if j in w:
                    w[j] -= lik * uv
                else:
                    w[j] = -lik * uv
                    if j < i:
                        heapq.heappush(heap, j)

        diag = w.pop(i, 0.0 + 0.0j)
        if abs(diag) < _EPS * rownorm or diag == 0.0:
            if not pivot_patch:
                raise ZeroDivisionError(f"zero pivot in row {i}")
            mag = max(drop_tol, _EPS) * rownorm
            if mag == 0.0:
                mag = 1.0
            phase = diag / abs(diag) if diag != 0.0 else 1.0
            diag = mag * phase
            patches += 1
        U_diag[i] = diag

        lower = [(j, v) for j, v in w.items() if j < i]
        upper = [(j, v) for j, v in w.items() if j > i and abs(v) >= tau]
        if caps is not None:
            lower = _cap(lower, caps[i])
            upper = _cap(upper, caps[i])
        lower.sort()
        upper.sort()
        L_rows.append(([j for j, _ in lower], [v for _, v in lower]))
        U_rows.append(([j for j, _ in upper], [v for _, v in upper]))

    if patches:
        logger.warning("ILUT patched %d zero pivot(s)", patches)
    L_ptr, L_idx, L_val = _freeze_rows(n, L_rows)
    U_ptr, U_idx, U_val = _freeze_rows(n, U_rows)
    return IlutFactors(n, L_ptr, L_idx, L_val, U_ptr, U_idx, U_val, U_diag,
                       drop_tol, fill_cap, patches)


class JdProjectedPreconditioner:
    """Applies the inverse of (I - y y^H) M (I - y y^H) within span(y)-perp.

    One-projection formula: t = M^-1 b - (y^H M^-1 b / y^H M^-1 y) M^-1 y,
    re-projected so the output is orthogonal to y to rounding. If M^-1
    nearly annihilates y the scalar breaks down and the application falls
    back to plain M^-1 followed by projection.
    """

    def __init__(self, factors, y):
        self.factors = factors
        nrm = np.linalg.norm(y)
        self.y = (y / nrm).astype(np.complex128)
        self.t_y = factors.solve(self.y)
        self.s_y = np.vdot(self.y, self.t_y)
        self.degenerate = abs(self.s_y) < _EPS * np.linalg.norm(self.t_y)
        if self.degenerate:
            logger.warning("projected preconditioner breakdown: |y^H M^-1 y| "
                           "at noise level, using plain M^-1 with projection")

    def apply(self, b):
        t = self.factors.solve(b)
        if not self.degenerate:
            t = t - (np.vdot(self.y, t) / self.s_y) * self.t_y
        t -= np.vdot(self.y, t) * self.y
        return t
