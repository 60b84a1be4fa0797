import numpy as np
import pytest

from innereig.sparse import SparseMatrix


def random_sparse(rng, n, per_row=5, scale=1.0, complex_=False, diag=None):
    """Random square CSR with ~per_row entries per row, optional fixed
    diagonal (planted spectrum when the off-diagonal part is triangular)."""
    rows, cols, vals = [], [], []
    for i in range(n):
        js = rng.choice(n, size=min(per_row, n), replace=False)
        for j in js:
            v = rng.standard_normal() * scale
            if complex_:
                v = v + 1j * rng.standard_normal() * scale
            rows.append(i)
            cols.append(j)
            vals.append(v)
    if diag is not None:
        for i in range(n):
            rows.append(i)
            cols.append(i)
            vals.append(diag[i])
    dtype = np.complex128 if complex_ else np.float64
    return SparseMatrix.from_coo(n, rows, cols, np.asarray(vals, dtype=dtype))


def planted_matrix(seed, n=100, per_row=4, upper_scale=0.3):
    """Sparse upper-triangular matrix with eigenvalues exactly 1..n.

    Strictly upper random entries make it nonnormal; the diagonal is the
    spectrum. Returns (A, eigenvalues)."""
    rng = np.random.default_rng(seed)
    rows, cols, vals = [], [], []
    lam = np.arange(1.0, n + 1.0)
    for i in range(n):
        rows.append(i)
        cols.append(i)
        vals.append(lam[i])
        if i + 1 < n:
            js = rng.choice(np.arange(i + 1, n),
                            size=min(per_row, n - i - 1), replace=False)
            for j in js:
                rows.append(i)
                cols.append(int(j))
                vals.append(upper_scale * rng.standard_normal())
    return SparseMatrix.from_coo(n, rows, cols, np.asarray(vals)), lam


@pytest.fixture
def make_random_sparse():
    return random_sparse


@pytest.fixture
def make_planted():
    return planted_matrix
