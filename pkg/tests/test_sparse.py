import numpy as np
import pytest
import scipy.sparse as sp

from services.sparse import (
    canonical,
    csr_from_triplets,
    dense_solve,
    factorize_coarse,
    galerkin_product,
    inf_norm,
    is_symmetric,
    residual,
    spgemm,
    spmv,
    transpose,
)
from utils.exceptions.numerics import DimensionMismatchException, SingularMatrixException, SparseFormatException


class TestCsrFromTriplets:

    def test_duplicates_are_summed(self):
        A = csr_from_triplets(2, 2, [(0, 0, 1.0), (0, 0, 2.0), (1, 1, 3.0)])
        np.testing.assert_array_equal(A.toarray(), [[3.0, 0.0], [0.0, 3.0]])
        assert A.nnz == 2

    def test_columns_sorted(self):
        A = csr_from_triplets(1, 4, [(0, 3, 1.0), (0, 0, 2.0), (0, 2, 5.0)])
        assert A.has_sorted_indices
        np.testing.assert_array_equal(A.indices, [0, 2, 3])

    def test_empty(self):
        A = csr_from_triplets(3, 2, [])
        assert A.shape == (3, 2)
        assert A.nnz == 0

    def test_out_of_range(self):
        with pytest.raises(SparseFormatException):
            csr_from_triplets(2, 2, [(2, 0, 1.0)])
        with pytest.raises(SparseFormatException):
            csr_from_triplets(2, 2, [(0, -1, 1.0)])


class TestProducts:

    def test_spmv(self):
        A = canonical(np.array([[1.0, 2.0], [0.0, 3.0]]))
        np.testing.assert_allclose(spmv(A, [1.0, 1.0]), [3.0, 3.0])

    def test_spmv_dimension_mismatch(self):
        A = canonical(np.eye(3))
        with pytest.raises(DimensionMismatchException):
            spmv(A, np.ones(2))

    def test_transpose(self, rng):
        dense = rng.standard_normal((4, 3)) * (rng.random((4, 3)) < 0.5)
        np.testing.assert_array_equal(transpose(canonical(dense)).toarray(), dense.T)

    def test_spgemm_matches_dense(self, rng):
        a = rng.standard_normal((5, 4)) * (rng.random((5, 4)) < 0.4)
        b = rng.standard_normal((4, 6)) * (rng.random((4, 6)) < 0.4)
        C = spgemm(canonical(a), canonical(b))
        np.testing.assert_allclose(C.toarray(), a @ b, atol=1e-14)
        assert C.has_sorted_indices

    def test_spgemm_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchException):
            spgemm(canonical(np.eye(2)), canonical(np.eye(3)))

    def test_galerkin_product(self, lap1d):
        A = lap1d(6)
        P = canonical(np.kron(np.eye(3), np.ones((2, 1))))
        Ac = galerkin_product(transpose(P), A, P)
        np.testing.assert_allclose(Ac.toarray(), P.toarray().T @ A.toarray() @ P.toarray())
        assert is_symmetric(Ac)


class TestResidualAndNorms:

    def test_residual(self):
        A = canonical(np.array([[2.0, 0.0], [0.0, 4.0]]))
        np.testing.assert_allclose(residual(A, [2.0, 4.0], [1.0, 1.0]), [0.0, 0.0])
        np.testing.assert_allclose(residual(A, [1.0, 1.0], [0.0, 0.0]), [1.0, 1.0])

    def test_inf_norm(self):
        assert inf_norm([1.0, -3.5, 2.0]) == 3.5
        assert inf_norm([]) == 0.0

    def test_residual_shape_check(self):
        with pytest.raises(DimensionMismatchException):
            residual(canonical(np.eye(2)), np.ones(3), np.ones(2))


class TestDenseSolve:

    def test_solves(self):
        A = canonical(np.array([[4.0, 1.0], [1.0, 3.0]]))
        x = dense_solve(A, np.array([1.0, 2.0]))
        np.testing.assert_allclose(A.toarray() @ x, [1.0, 2.0])

    def test_singular(self):
        A = canonical(np.array([[1.0, 2.0], [2.0, 4.0]]))
        with pytest.raises(SingularMatrixException):
            dense_solve(A, np.ones(2))

    def test_coarse_factorization_switches_to_sparse(self):
        A = canonical(np.array([[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]]))
        b = np.array([1.0, 2.0, 3.0])
        dense_method, dense = factorize_coarse(A, dense_limit=3)
        sparse_method, sparse = factorize_coarse(A, dense_limit=2)
        assert (dense_method, sparse_method) == ("dense", "sparse")
        np.testing.assert_allclose(sparse(b), dense(b))

    def test_sparse_coarse_factorization_singular(self):
        A = canonical(np.array([[1.0, 2.0], [2.0, 4.0]]))
        with pytest.raises(SingularMatrixException):
            factorize_coarse(A, dense_limit=1)

    def test_symmetry_check(self):
        assert is_symmetric(canonical(np.array([[1.0, 2.0], [2.0, 1.0]])))
        assert not is_symmetric(canonical(np.array([[1.0, 2.0], [0.0, 1.0]])))
        assert is_symmetric(canonical(sp.identity(3)))
