import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from schemas.coarsening import CoarsenerChoice
from schemas.smoothing import SmootherConfig, SmootherKind
from services.clustering import ClusterAssignment
from services.embedding import Embedding
from services.smoothing import inverse_diagonal, split_dlu
from services.sparse import CsrMatrix, canonical, spgemm
from services.walks import WalkCorpus
from utils.decorators.timing import log_stage
from utils.exceptions.learning import CoarseningException
from utils.exceptions.numerics import DimensionMismatchException

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AggregateSet:
    """Partition of the fine nodes into n_coarse aggregates"""
    n_fine: int
    n_coarse: int
    assignment: ClusterAssignment

    @classmethod
    def from_labels(cls, labels, n_coarse: Optional[int] = None) -> "AggregateSet":
        labels = np.asarray(labels, dtype=np.int64)
        if n_coarse is None:
            n_coarse = int(labels.max()) + 1 if labels.size else 0
        return cls(n_fine=int(labels.size), n_coarse=n_coarse,
                   assignment=ClusterAssignment(labels=labels, n_clusters=n_coarse))

    @property
    def labels(self) -> np.ndarray:
        return self.assignment.labels


def prolongation_from_aggregates(agg: AggregateSet) -> CsrMatrix:
    """
    Piecewise-constant prolongation: P[i, j] = 1 when node i belongs to
    aggregate j, zero otherwise.

    Raises:
        CoarseningException: a label is out of range or an aggregate is empty
    """
    labels = agg.labels
    if labels.shape != (agg.n_fine,):
        raise CoarseningException(f"expected {agg.n_fine} labels, got {labels.size}", stage="aggregation")
    if labels.size and (labels.min() < 0 or labels.max() >= agg.n_coarse):
        raise CoarseningException(f"aggregate label outside [0, {agg.n_coarse})", stage="aggregation")
    sizes = np.bincount(labels, minlength=agg.n_coarse)
    empty = np.flatnonzero(sizes == 0)
    if empty.size:
        raise CoarseningException(
            f"{empty.size} empty aggregates; the prolongation would lose column rank",
            stage="aggregation", details={"empty": empty[:20].tolist()},
        )
    return sp.csr_matrix(
        (np.ones(agg.n_fine), labels, np.arange(agg.n_fine + 1)),
        shape=(agg.n_fine, agg.n_coarse),
    )


@log_stage("prolongation_smoothing")
def smooth_prolongation(A: CsrMatrix, P_hat: CsrMatrix, cfg: SmootherConfig) -> CsrMatrix:
    """
    One smoothing step applied to a tentative prolongation.

    jacobi:        P = (I - D^-1 A) P_hat
    damped_jacobi: P = (I - omega D^-1 A) P_hat
    gauss_seidel:  P = (I - (D + L)^-1 A) P_hat
    sor:           P = (I - omega (D + omega L)^-1 A) P_hat

    Raises:
        SmootherException: zero diagonal entry
    """
    if A.shape[0] != A.shape[1] or A.shape[1] != P_hat.shape[0]:
        raise DimensionMismatchException(
            f"cannot smooth a {P_hat.shape} prolongation with a {A.shape} operator",
            expected=(A.shape[0], "*"), actual=P_hat.shape,
        )
    d_inv = inverse_diagonal(A)
    AP = spgemm(A, P_hat)

    if cfg.kind in (SmootherKind.JACOBI, SmootherKind.DAMPED_JACOBI):
        weight = 1.0 if cfg.kind == SmootherKind.JACOBI else cfg.omega
        correction = sp.diags(weight * d_inv) @ AP
    else:
        D, L, _ = split_dlu(A)
        omega = 1.0 if cfg.kind == SmootherKind.GAUSS_SEIDEL else cfg.omega
        lower = (D + omega * L).tocsc()
        solved = spsolve(lower, AP.tocsc())
        # a single-column right-hand side comes back as a dense vector
        if not sp.issparse(solved):
            solved = np.reshape(solved, AP.shape)
        correction = omega * sp.csr_matrix(solved)

    P = canonical(P_hat - correction)
    P.eliminate_zeros()
    return P


@dataclass(frozen=True, eq=False)
class CoarseningResult:
    """Prolongation plus the intermediate products worth exporting"""
    prolongation: CsrMatrix
    aggregates: Optional[AggregateSet] = None
    corpus: Optional[WalkCorpus] = None
    embedding: Optional[Embedding] = None

    @property
    def n_coarse(self) -> int:
        return int(self.prolongation.shape[1])


class Coarsener(ABC):
    """
    Builds the prolongation for one level. Instances hold only configuration
    and may be shared between threads.
    """

    def __init__(self, choice: CoarsenerChoice):
        self.choice = choice

    @property
    def name(self) -> str:
        return self.choice.label

    @abstractmethod
    def tentative(self, A: CsrMatrix) -> CoarseningResult:
        """Unsmoothed prolongation and its by-products"""

    def run(self, A: CsrMatrix) -> CoarseningResult:
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatchException(f"coarsening needs a square matrix, got {A.shape}",
                                             expected="square", actual=A.shape)
        result = self.tentative(A)
        if self.choice.prolongation_smoothing is not None:
            result = replace(result, prolongation=smooth_prolongation(
                A, result.prolongation, self.choice.prolongation_smoothing))
        logger.debug("Coarsened level", extra={"amg_data": {
            "coarsener": self.name, "n_fine": int(A.shape[0]), "n_coarse": result.n_coarse,
            "prolongation_nnz": int(result.prolongation.nnz)}})
        return result

    def prolongation(self, A: CsrMatrix) -> CsrMatrix:
        return self.run(A).prolongation
