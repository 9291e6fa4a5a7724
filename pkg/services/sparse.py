"""
Sparse-core kernels.

CsrMatrix is scipy's ``csr_matrix`` kept in canonical form (sorted column
indices, duplicates merged, float64 values). Every function here returns a new
object; inputs are never modified.
"""
import functools
import logging
from typing import Callable, Iterable, Sequence, Tuple

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from utils.exceptions.numerics import (
    DimensionMismatchException,
    SingularMatrixException,
    SparseFormatException,
)

logger = logging.getLogger(__name__)

CsrMatrix = sp.csr_matrix
DenseVector = np.ndarray

Triplet = Tuple[int, int, float]


def canonical(A) -> CsrMatrix:
    """Copy any scipy sparse (or dense) matrix into canonical float64 CSR"""
    C = sp.csr_matrix(A, dtype=np.float64, copy=True)
    C.sum_duplicates()
    C.sort_indices()
    return C


def csr_from_triplets(n_rows: int, n_cols: int, entries: Iterable[Triplet]) -> CsrMatrix:
    """
    Assemble a CSR matrix from (row, col, value) triplets; duplicates are summed.

    Raises:
        SparseFormatException: an index is outside the matrix
    """
    if n_rows < 0 or n_cols < 0:
        raise SparseFormatException(f"negative shape ({n_rows}, {n_cols})")
    entries = list(entries)
    if entries:
        rows, cols, vals = (np.asarray(column) for column in zip(*entries))
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0, dtype=np.float64)
    rows = rows.astype(np.int64)
    cols = cols.astype(np.int64)

    bad = (rows < 0) | (rows >= n_rows) | (cols < 0) | (cols >= n_cols)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise SparseFormatException(
            f"triplet ({rows[k]}, {cols[k]}) out of range for {n_rows}x{n_cols} matrix",
            details={"index": k},
        )

    A = sp.coo_matrix((vals.astype(np.float64), (rows, cols)), shape=(n_rows, n_cols)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


def _check_vector(A: CsrMatrix, x: np.ndarray, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != A.shape[1]:
        raise DimensionMismatchException(
            f"{name} has shape {x.shape}, matrix has {A.shape[1]} columns",
            expected=(A.shape[1],), actual=x.shape,
        )
    return x


def spmv(A: CsrMatrix, x: DenseVector) -> DenseVector:
    """y = A x"""
    x = _check_vector(A, x)
    return np.asarray(A @ x, dtype=np.float64)


def transpose(A: CsrMatrix) -> CsrMatrix:
    return canonical(A.transpose())


def spgemm(A: CsrMatrix, B: CsrMatrix) -> CsrMatrix:
    """C = A B with merged duplicates and sorted rows"""
    if A.shape[1] != B.shape[0]:
        raise DimensionMismatchException(
            f"cannot multiply {A.shape} by {B.shape}",
            expected=(A.shape[1], "*"), actual=B.shape,
        )
    C = (A @ B).tocsr()
    C.sum_duplicates()
    C.sort_indices()
    return C


def galerkin_product(R: CsrMatrix, A: CsrMatrix, P: CsrMatrix) -> CsrMatrix:
    """A_c = R A P as two successive sparse products"""
    return spgemm(spgemm(R, A), P)


def residual(A: CsrMatrix, f: DenseVector, v: DenseVector) -> DenseVector:
    """r = f - A v"""
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 1 or f.shape[0] != A.shape[0]:
        raise DimensionMismatchException(
            f"f has shape {f.shape}, matrix has {A.shape[0]} rows",
            expected=(A.shape[0],), actual=f.shape,
        )
    return f - spmv(A, v)


def inf_norm(x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return 0.0
    return float(np.max(np.abs(x)))


def to_dense(A: CsrMatrix) -> np.ndarray:
    return np.asarray(A.toarray(), dtype=np.float64)


def factorize_dense(A: CsrMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """
    Pivoted LU of a small matrix, reused across coarsest-level solves.

    Raises:
        SingularMatrixException: a zero (or non-finite) pivot appears
    """
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatchException(f"dense solve needs a square matrix, got {A.shape}",
                                         expected="square", actual=A.shape)
    dense = to_dense(A)
    if dense.size == 0:
        return dense, np.zeros(0, dtype=np.int32)
    lu, piv = la.lu_factor(dense, check_finite=True)
    pivots = np.abs(np.diag(lu))
    scale = max(1.0, float(np.max(np.abs(dense))))
    if not np.all(np.isfinite(pivots)) or np.min(pivots) <= np.finfo(np.float64).eps * scale * dense.shape[0]:
        raise SingularMatrixException(
            f"matrix of order {dense.shape[0]} is singular to working precision",
            details={"min_pivot": float(np.min(pivots))},
        )
    return lu, piv


def lu_apply(factors: Tuple[np.ndarray, np.ndarray], b: DenseVector) -> DenseVector:
    lu, piv = factors
    if lu.size == 0:
        return np.zeros(0, dtype=np.float64)
    return la.lu_solve((lu, piv), np.asarray(b, dtype=np.float64))


def factorize_coarse(A: CsrMatrix, dense_limit: int) -> Tuple[str, Callable[[DenseVector], DenseVector]]:
    """
    Direct solver for a coarsest-level operator: dense LU up to ``dense_limit``
    unknowns, sparse LU above. Returns the method name and the solve callable.

    Raises:
        SingularMatrixException: the operator is singular
    """
    if A.shape[0] <= dense_limit:
        return "dense", functools.partial(lu_apply, factorize_dense(A))
    try:
        factors = splu(sp.csc_matrix(A))
    except RuntimeError as e:
        raise SingularMatrixException(f"sparse LU failed on a matrix of order {A.shape[0]}: {e}",
                                      original_exception=e)
    return "sparse", lambda b: factors.solve(np.asarray(b, dtype=np.float64))


def dense_solve(A: CsrMatrix, b: DenseVector) -> DenseVector:
    """Solve A x = b by dense LU with partial pivoting"""
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 1 or b.shape[0] != A.shape[0]:
        raise DimensionMismatchException(
            f"b has shape {b.shape}, matrix has {A.shape[0]} rows",
            expected=(A.shape[0],), actual=b.shape,
        )
    return lu_apply(factorize_dense(A), b)


def is_symmetric(A: CsrMatrix, tol: float = 0.0) -> bool:
    diff = (A - A.T).tocsr()
    if diff.nnz == 0:
        return True
    scale = max(1.0, float(np.max(np.abs(A.data)))) if A.nnz else 1.0
    return float(np.max(np.abs(diff.data))) <= tol * scale
