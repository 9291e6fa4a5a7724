import logging
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

from schemas.smoothing import SmootherConfig, SmootherKind
from services.sparse import CsrMatrix, DenseVector, canonical, residual
from utils.exceptions.numerics import DimensionMismatchException, SmootherException

logger = logging.getLogger(__name__)


class DLUSplit(NamedTuple):
    """A = D + L + U with D diagonal, L strictly lower, U strictly upper"""
    D: CsrMatrix
    L: CsrMatrix
    U: CsrMatrix

    @property
    def zero_diagonal_rows(self) -> np.ndarray:
        return np.flatnonzero(self.D.diagonal() == 0)

    @property
    def has_zero_diagonal(self) -> bool:
        return self.zero_diagonal_rows.size > 0


def _check_square(A: CsrMatrix) -> None:
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatchException(f"expected a square matrix, got {A.shape}",
                                         expected="square", actual=A.shape)


def split_dlu(A: CsrMatrix) -> DLUSplit:
    """
    Split A into diagonal, strictly lower and strictly upper parts.

    A zero diagonal is not an error here; callers check
    ``split.has_zero_diagonal`` before using D^-1.
    """
    _check_square(A)
    split = DLUSplit(
        D=canonical(sp.diags(A.diagonal(), format="csr")),
        L=canonical(sp.tril(A, k=-1, format="csr")),
        U=canonical(sp.triu(A, k=1, format="csr")),
    )
    if split.has_zero_diagonal:
        logger.debug("Zero diagonal entries found",
                     extra={"amg_data": {"rows": split.zero_diagonal_rows[:20].tolist()}})
    return split


def inverse_diagonal(A: CsrMatrix) -> np.ndarray:
    """
    Raises:
        SmootherException: any diagonal entry is zero
    """
    diagonal = A.diagonal()
    zero_rows = np.flatnonzero(diagonal == 0)
    if zero_rows.size:
        raise SmootherException(
            f"{zero_rows.size} zero diagonal entries; Jacobi-type smoothing is undefined",
            rows=zero_rows,
        )
    return 1.0 / diagonal


def _forward_sweep(lower: CsrMatrix, upper_part: CsrMatrix, rhs: np.ndarray, v: np.ndarray) -> np.ndarray:
    # lower * v_new = rhs - upper_part * v_old, solved row by row in ascending order
    return spsolve_triangular(lower, rhs - upper_part @ v, lower=True)


def smooth(A: CsrMatrix, f: DenseVector, v: DenseVector, cfg: SmootherConfig) -> DenseVector:
    """
    Apply ``cfg.sweeps`` stationary updates to v and return the new iterate.

    Jacobi:        v <- D^-1 (f - (L + U) v)
    damped Jacobi: v <- v + omega D^-1 (f - A v)
    Gauss-Seidel:  (D + L) v_new = f - U v_old
    SOR:           (D + omega L) v_new = omega f - (omega U + (omega - 1) D) v_old

    The input vector is left unmodified.
    """
    _check_square(A)
    v = np.array(v, dtype=np.float64, copy=True)
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (A.shape[0],) or v.shape != (A.shape[0],):
        raise DimensionMismatchException(
            f"smoother vectors {f.shape}/{v.shape} do not match matrix {A.shape}",
            expected=(A.shape[0],), actual=(f.shape, v.shape),
        )
    if cfg.sweeps == 0:
        return v

    d_inv = inverse_diagonal(A)

    if cfg.kind in (SmootherKind.JACOBI, SmootherKind.DAMPED_JACOBI):
        weight = 1.0 if cfg.kind == SmootherKind.JACOBI else cfg.omega
        for _ in range(cfg.sweeps):
            v = v + weight * d_inv * residual(A, f, v)
        return v

    D, L, U = split_dlu(A)
    if cfg.kind == SmootherKind.GAUSS_SEIDEL:
        lower = (D + L).tocsr()
        for _ in range(cfg.sweeps):
            v = _forward_sweep(lower, U, f, v)
        return v

    omega = cfg.omega
    lower = (D + omega * L).tocsr()
    upper_part = (omega * U + (omega - 1.0) * D).tocsr()
    for _ in range(cfg.sweeps):
        v = _forward_sweep(lower, upper_part, omega * f, v)
    return v
