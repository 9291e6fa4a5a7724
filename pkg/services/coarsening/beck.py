import logging

import numpy as np
import scipy.sparse as sp

from services.coarsening.base import Coarsener, CoarseningResult
from services.graph import WeightedGraph, graph_from_matrix
from services.sparse import CsrMatrix

logger = logging.getLogger(__name__)

UNDECIDED, COARSE, FINE = 0, 1, 2


def coarse_fine_split(graph: WeightedGraph) -> np.ndarray:
    """
    Greedy maximal independent set visited by descending connection count
    (stable on node index). Returns a status per node, COARSE or FINE.
    """
    degrees = np.diff(graph.indptr)
    status = np.full(graph.n_nodes, UNDECIDED, dtype=np.int8)
    for i in np.argsort(-degrees, kind="stable"):
        if status[i] != UNDECIDED:
            continue
        status[i] = COARSE
        nbrs = graph.neighbors(i)
        status[nbrs[status[nbrs] == UNDECIDED]] = FINE
    return status


def beck_coarsen(A: CsrMatrix) -> CsrMatrix:
    """
    Interpolation from a degree-ordered coarse/fine split.

    Coarse nodes inject (unit rows); a fine node takes the average of its
    coarse neighbours. A fine node without coarse neighbours is promoted.
    Coarse columns follow node order.
    """
    graph = graph_from_matrix(A)
    status = coarse_fine_split(graph)

    for i in np.flatnonzero(status == FINE):
        if not np.any(status[graph.neighbors(i)] == COARSE):
            status[i] = COARSE

    coarse_nodes = np.flatnonzero(status == COARSE)
    column = np.full(graph.n_nodes, -1, dtype=np.int64)
    column[coarse_nodes] = np.arange(coarse_nodes.size)

    rows, cols, vals = [], [], []
    for i in range(graph.n_nodes):
        if status[i] == COARSE:
            rows.append(i)
            cols.append(column[i])
            vals.append(1.0)
            continue
        nbrs = graph.neighbors(i)
        coarse_nbrs = nbrs[status[nbrs] == COARSE]
        weight = 1.0 / coarse_nbrs.size
        rows.extend([i] * coarse_nbrs.size)
        cols.extend(column[coarse_nbrs].tolist())
        vals.extend([weight] * coarse_nbrs.size)

    logger.debug("Coarse/fine split", extra={"amg_data": {
        "n": graph.n_nodes, "coarse": int(coarse_nodes.size)}})
    P = sp.csr_matrix((vals, (rows, cols)), shape=(graph.n_nodes, coarse_nodes.size))
    P.sort_indices()
    return P


class BeckCoarsener(Coarsener):

    def tentative(self, A: CsrMatrix) -> CoarseningResult:
        return CoarseningResult(prolongation=beck_coarsen(A))
