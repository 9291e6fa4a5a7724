import logging

import numpy as np
import scipy.sparse as sp

from schemas.coarsening import CoarsenerChoice, CoarsenerKind
from services.coarsening.base import AggregateSet, Coarsener, CoarseningResult, prolongation_from_aggregates
from services.sparse import CsrMatrix, canonical
from utils.exceptions.learning import CoarseningException

logger = logging.getLogger(__name__)


def strong_neighbors(A: CsrMatrix, epsilon: float) -> CsrMatrix:
    """
    Pattern of strong couplings |A_ij| >= epsilon * sqrt(|A_ii A_jj|), i != j,
    storing |A_ij| as the value.

    Raises:
        CoarseningException: a diagonal entry is zero
    """
    diagonal = np.abs(A.diagonal())
    zero_rows = np.flatnonzero(diagonal == 0)
    if zero_rows.size:
        raise CoarseningException(
            f"{zero_rows.size} zero diagonal entries; coupling strength is undefined",
            stage="aggregation", details={"rows": zero_rows[:20].tolist()},
        )
    C = canonical(A).tocoo()
    magnitude = np.abs(C.data)
    keep = (C.row != C.col) & (magnitude > 0) & (
        magnitude >= epsilon * np.sqrt(diagonal[C.row] * diagonal[C.col]))
    S = sp.csr_matrix((magnitude[keep], (C.row[keep], C.col[keep])), shape=A.shape)
    S.sort_indices()
    return S


def vanek_aggregates(A: CsrMatrix, epsilon: float) -> AggregateSet:
    """
    Three-pass standard aggregation.

    1. An unaggregated node whose strong neighbourhood is nonempty and fully
       unaggregated seeds the aggregate {i} + N_i.
    2. Leftover nodes join the pass-1 aggregate of their strongest
       aggregated neighbour (ties go to the smallest neighbour index).
    3. Whatever remains becomes a singleton.
    """
    n = A.shape[0]
    S = strong_neighbors(A, epsilon)
    labels = np.full(n, -1, dtype=np.int64)
    n_aggregates = 0

    for i in range(n):
        if labels[i] != -1:
            continue
        nbrs = S.indices[S.indptr[i]:S.indptr[i + 1]]
        if nbrs.size == 0 or np.any(labels[nbrs] != -1):
            continue
        labels[nbrs] = n_aggregates
        labels[i] = n_aggregates
        n_aggregates += 1

    seeded = labels.copy()
    for i in np.flatnonzero(seeded == -1):
        start, stop = S.indptr[i], S.indptr[i + 1]
        nbrs, strength = S.indices[start:stop], S.data[start:stop]
        candidates = seeded[nbrs] != -1
        if np.any(candidates):
            best = np.argmax(np.where(candidates, strength, -np.inf))
            labels[i] = seeded[nbrs[best]]

    for i in np.flatnonzero(labels == -1):
        labels[i] = n_aggregates
        n_aggregates += 1

    logger.debug("Standard aggregation", extra={"amg_data": {
        "n": n, "aggregates": n_aggregates, "seeded": int((seeded != -1).sum()), "epsilon": epsilon}})
    return AggregateSet.from_labels(labels, n_aggregates)


def vanek_coarsen(A: CsrMatrix, epsilon: float) -> CsrMatrix:
    """Piecewise-constant prolongation over the standard aggregates"""
    return prolongation_from_aggregates(vanek_aggregates(A, epsilon))


class VanekCoarsener(Coarsener):

    def tentative(self, A: CsrMatrix) -> CoarseningResult:
        aggregates = vanek_aggregates(A, self.choice.vanek_epsilon)
        return CoarseningResult(prolongation=prolongation_from_aggregates(aggregates), aggregates=aggregates)

    @classmethod
    def with_epsilon(cls, epsilon: float) -> "VanekCoarsener":
        return cls(CoarsenerChoice(kind=CoarsenerKind.VANEK, vanek_epsilon=epsilon))
