import logging
import math
from typing import Tuple

import numpy as np
import scipy.sparse as sp

from schemas.problems import PoissonSpec, RhsKind
from services.sparse import CsrMatrix, DenseVector, canonical, inf_norm
from utils.exceptions.numerics import DimensionMismatchException

logger = logging.getLogger(__name__)


def _second_difference(n: int) -> sp.csr_matrix:
    return sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format="csr")


def grid_spacing(spec: PoissonSpec) -> float:
    return 1.0 / (spec.nx + 1)


def grid_coordinates(spec: PoissonSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Interior point coordinates, x varying fastest"""
    x = np.arange(1, spec.nx + 1) / (spec.nx + 1)
    y = np.arange(1, spec.ny + 1) / (spec.ny + 1)
    X, Y = np.meshgrid(x, y)
    return X.ravel(), Y.ravel()


def manufactured_solution(spec: PoissonSpec) -> DenseVector:
    """u*(x, y) = sin(pi x) sin(pi y) sampled on the interior grid"""
    x, y = grid_coordinates(spec)
    return np.sin(np.pi * x) * np.sin(np.pi * y)


def poisson_rhs(spec: PoissonSpec) -> DenseVector:
    n = spec.nx * spec.ny
    if spec.rhs == RhsKind.ZERO:
        return np.zeros(n)
    if spec.rhs == RhsKind.ONES:
        return np.ones(n)
    return 2.0 * np.pi ** 2 * manufactured_solution(spec)


def poisson_2d(spec: PoissonSpec) -> Tuple[CsrMatrix, DenseVector]:
    """
    5-point finite-difference Laplacian on an nx x ny interior grid of the
    unit square with homogeneous Dirichlet boundary, scaled by 1/h^2 with
    h = 1/(nx + 1). Unknown (i, j) has index j * nx + i.
    """
    h = grid_spacing(spec)
    A = sp.kron(sp.identity(spec.ny), _second_difference(spec.nx)) \
        + sp.kron(_second_difference(spec.ny), sp.identity(spec.nx))
    A = canonical(A / h ** 2)
    # kron leaves explicit zeros on grids narrower than the stencil
    A.eliminate_zeros()
    logger.debug("Assembled Poisson system",
                 extra={"amg_data": {"nx": spec.nx, "ny": spec.ny, "nnz": int(A.nnz), "rhs": spec.rhs.value}})
    return A, poisson_rhs(spec)


def grid_for_size(size: int) -> Tuple[int, int]:
    """Nearest square grid to ``size`` unknowns"""
    side = max(1, round(math.sqrt(size)))
    return side, side


def solution_error_inf(v: DenseVector, spec: PoissonSpec) -> float:
    """Infinity-norm distance to the sampled manufactured solution"""
    exact = manufactured_solution(spec)
    if np.shape(v) != exact.shape:
        raise DimensionMismatchException("solution does not match the grid",
                                         expected=exact.shape, actual=np.shape(v))
    return inf_norm(np.asarray(v) - exact)
