import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from services.sparse import CsrMatrix
from utils.exceptions.learning import GraphException
from utils.exceptions.numerics import DimensionMismatchException

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """
    Undirected weighted graph in CSR adjacency form.

    Neighbour lists are sorted, weights are positive, there are no self-loops
    and the adjacency is symmetric.
    """
    n_nodes: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    @property
    def n_edges(self) -> int:
        """Undirected edge count"""
        return int(self.indices.size) // 2

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def neighbor_weights(self, u: int) -> np.ndarray:
        return self.weights[self.indptr[u]:self.indptr[u + 1]]

    def degree(self, u: int) -> int:
        return int(self.indptr[u + 1] - self.indptr[u])

    def has_edge(self, u: int, v: int) -> bool:
        """Binary search in u's sorted neighbour list"""
        row = self.neighbors(u)
        k = np.searchsorted(row, v)
        return bool(k < row.size and row[k] == v)

    def to_csr(self) -> CsrMatrix:
        return sp.csr_matrix((self.weights, self.indices, self.indptr), shape=(self.n_nodes, self.n_nodes))


def graph_from_matrix(A: CsrMatrix) -> WeightedGraph:
    """
    Edge (i, j) for every off-diagonal nonzero, weighted max(|A_ij|, |A_ji|).
    The diagonal is ignored.
    """
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatchException(f"graph conversion needs a square matrix, got {A.shape}",
                                         expected="square", actual=A.shape)
    B = abs(sp.csr_matrix(A, dtype=np.float64))
    B = (B - sp.diags(B.diagonal())).tocsr()
    B.eliminate_zeros()
    W = B.maximum(B.T).tocsr()
    W.eliminate_zeros()
    W.sort_indices()
    return WeightedGraph(
        n_nodes=A.shape[0],
        indptr=W.indptr.astype(np.int64),
        indices=W.indices.astype(np.int64),
        weights=W.data.astype(np.float64),
    )


def average_degree(G: WeightedGraph) -> float:
    """Directed edge endpoints per node (each undirected edge counted twice)"""
    if G.n_nodes == 0:
        raise GraphException("average degree of an empty graph is undefined")
    return G.indices.size / G.n_nodes


def cluster_connectivity(G: WeightedGraph, labels: np.ndarray) -> float:
    """Fraction of clusters whose members induce a connected subgraph of G"""
    labels = np.asarray(labels)
    if labels.shape != (G.n_nodes,):
        raise DimensionMismatchException("one label per node required",
                                         expected=(G.n_nodes,), actual=labels.shape)
    adjacency = G.to_csr().tocoo()
    same = labels[adjacency.row] == labels[adjacency.col]
    intra = sp.csr_matrix(
        (np.ones(int(same.sum())), (adjacency.row[same], adjacency.col[same])),
        shape=(G.n_nodes, G.n_nodes),
    )
    _, components = connected_components(intra, directed=False)
    clusters = np.unique(labels)
    # a cluster is connected when all its members share one component
    connected = sum(np.unique(components[labels == c]).size == 1 for c in clusters)
    return connected / clusters.size if clusters.size else 1.0
