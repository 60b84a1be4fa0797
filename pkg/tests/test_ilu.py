import numpy as np
import pytest

from innereig.ilu import JdProjectedPreconditioner, ilut_factorize
from innereig.sparse import SparseMatrix


def factors_to_dense(F):
    n = F.n
    L = np.eye(n, dtype=complex)
    U = np.zeros((n, n), dtype=complex)
    for i in range(n):
        lo, hi = F.L_ptr[i], F.L_ptr[i + 1]
        L[i, F.L_idx[lo:hi]] = F.L_val[lo:hi]
        lo, hi = F.U_ptr[i], F.U_ptr[i + 1]
        U[i, F.U_idx[lo:hi]] = F.U_val[lo:hi]
        U[i, i] = F.U_diag[i]
    return L, U


@pytest.fixture
def small_matrix():
    rng = np.random.default_rng(20)
    D = rng.standard_normal((5, 5)) + 5.0 * np.eye(5)
    return SparseMatrix.from_dense(D)


class TestFactorize:
    def test_no_dropping_is_exact_lu(self, small_matrix):
        sigma = 0.7
        F = ilut_factorize(small_matrix, sigma, drop_tol=0.0)
        L, U = factors_to_dense(F)
        target = small_matrix.to_dense() - sigma * np.eye(5)
        err = np.linalg.norm(L @ U - target) / np.linalg.norm(target)
        assert err <= 1e-13

    def test_diagonal_matrix(self):
        A = SparseMatrix.from_dense(np.diag([2.0, -3.0, 4.0]))
        F = ilut_factorize(A, 1.0, drop_tol=0.5)
        L, U = factors_to_dense(F)
        assert np.allclose(L, np.eye(3))
        assert np.allclose(U, np.diag([1.0, -4.0, 3.0]))

    def test_complex_shift(self, small_matrix):
        sigma = 0.3 + 1.2j
        F = ilut_factorize(small_matrix, sigma, drop_tol=0.0)
        L, U = factors_to_dense(F)
        target = small_matrix.to_dense().astype(complex) - sigma * np.eye(5)
        assert np.linalg.norm(L @ U - target) <= 1e-13 * np.linalg.norm(target)

    def test_zero_pivot_patched(self):
        A = SparseMatrix.from_dense(np.array([[0.0, 1.0], [1.0, 0.0]]))
        F = ilut_factorize(A, 0.0, drop_tol=0.0)
        assert F.pivot_patches >= 1
        x = F.solve(np.array([1.0, 1.0]))
        assert np.all(np.isfinite(x))

    def test_negative_drop_tol_rejected(self, small_matrix):
        with pytest.raises(ValueError):
            ilut_factorize(small_matrix, 0.0, drop_tol=-1.0)

    def test_fill_cap_sparsity(self, make_random_sparse):
        # symmetric pattern so strict lower/upper per-row counts coincide
        rng = np.random.default_rng(21)
        n = 60
        B = make_random_sparse(rng, n, per_row=4)
        D = B.to_dense()
        D = D + D.T + 10.0 * np.eye(n)
        A = SparseMatrix.from_dense(D)
        sigma = 0.5
        shifted_nnz = np.count_nonzero(D - sigma * np.eye(n))
        caps = np.array([np.count_nonzero(D[i, :i]) for i in range(n)])
        F = ilut_factorize(A, sigma, drop_tol=1e-3, fill_cap=np.maximum(caps, 1))
        assert F.nnz_lower + F.nnz_upper <= shifted_nnz + 2 * n


class TestApplyInverse:
    def test_identity(self):
        A = SparseMatrix.from_dense(np.eye(4))
        F = ilut_factorize(A, 0.0, drop_tol=0.0)
        b = np.arange(1.0, 5.0)
        assert np.allclose(F.solve(b), b)

    def test_exact_factors_invert(self, small_matrix):
        F = ilut_factorize(small_matrix, 0.0, drop_tol=0.0)
        rng = np.random.default_rng(22)
        b = rng.standard_normal(5)
        x = F.solve(b)
        res = np.linalg.norm(small_matrix.matvec(x) - b)
        assert res <= 1e-12 * np.linalg.norm(b)

    def test_preconditioner_reduces_residual(self, make_random_sparse):
        rng = np.random.default_rng(23)
        n = 80
        A = make_random_sparse(rng, n, per_row=5,
                               diag=8.0 + np.abs(rng.standard_normal(n)))
        sigma = 0.4
        F = ilut_factorize(A, sigma, drop_tol=1e-3)
        b = rng.standard_normal(n)
        bn = np.linalg.norm(b)
        with_pc = np.linalg.norm(A.shifted_matvec(sigma, F.solve(b)) - b) / bn
        without = np.linalg.norm(A.shifted_matvec(sigma, b.astype(complex)) - b) / bn
        assert with_pc < without

    def test_dimension_mismatch(self, small_matrix):
        F = ilut_factorize(small_matrix, 0.0, drop_tol=0.0)
        with pytest.raises(ValueError):
            F.solve(np.ones(6))


class TestProjectedPreconditioner:
    def _unit(self, rng, n):
        y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        return y / np.linalg.norm(y)

    def test_identity_preconditioner(self):
        rng = np.random.default_rng(24)
        n = 12
        F = ilut_factorize(SparseMatrix.from_dense(np.eye(n)), 0.0, 0.0)
        y = self._unit(rng, n)
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        b -= np.vdot(y, b) * y
        P = JdProjectedPreconditioner(F, y)
        assert np.allclose(P.apply(b), b, atol=1e-13)

    def test_zero_rhs(self):
        F = ilut_factorize(SparseMatrix.from_dense(np.eye(3)), 0.0, 0.0)
        P = JdProjectedPreconditioner(F, np.array([1.0, 0.0, 0.0]))
        assert np.allclose(P.apply(np.zeros(3)), 0.0)

    def test_projected_apply_oracle(self, make_random_sparse):
        rng = np.random.default_rng(25)
        n = 40
        A = make_random_sparse(rng, n, per_row=4,
                               diag=6.0 + np.abs(rng.standard_normal(n)))
        F = ilut_factorize(A, 0.0, drop_tol=0.0)  # exact factors: M = A
        M = A.to_dense().astype(complex)
        y = self._unit(rng, n)
        Pm = np.eye(n) - np.outer(y, y.conj())
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        b = Pm @ b
        t = JdProjectedPreconditioner(F, y).apply(b)
        back = Pm @ (M @ (Pm @ t))
        assert np.linalg.norm(back - b) <= 1e-10 * np.linalg.norm(b)

    def test_output_orthogonal_always(self, make_random_sparse):
        rng = np.random.default_rng(26)
        n = 30
        A = make_random_sparse(rng, n, per_row=4,
                               diag=5.0 + np.abs(rng.standard_normal(n)))
        F = ilut_factorize(A, 0.1, drop_tol=1e-2)
        for _ in range(10):
            y = self._unit(rng, n)
            b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            b -= np.vdot(y, b) * y
            t = JdProjectedPreconditioner(F, y).apply(b)
            assert abs(np.vdot(y, t)) <= 1e-12 * np.linalg.norm(t)
