import logging

import numpy as np
import pytest
import scipy.sparse as sp

from schemas.clustering import ClusterConfig
from schemas.coarsening import CoarsenerChoice, CoarsenerKind, GLCoarsenerConfig
from schemas.embedding import EmbeddingConfig
from schemas.problems import PoissonSpec
from schemas.walks import WalkConfig
from services.problems import poisson_2d
from services.sparse import canonical
from utils.logging.solver import SOLVER_LOGGERS


def laplacian_1d(n: int) -> sp.csr_matrix:
    """tridiag(-1, 2, -1) without scaling"""
    return canonical(sp.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1]))


def graph_laplacian(n: int, edges) -> sp.csr_matrix:
    """Degree + 1 on the diagonal, -1 per edge; SPD for any graph"""
    A = np.eye(n)
    for u, v in edges:
        A[u, v] = A[v, u] = -1.0
        A[u, u] += 1.0
        A[v, v] += 1.0
    return canonical(A)


def barbell_edges():
    """Two 5-cliques {0..4} and {5..9} joined by the bridge 4-5"""
    edges = []
    for block in (range(0, 5), range(5, 10)):
        nodes = list(block)
        edges.extend((u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:])
    edges.append((4, 5))
    return edges


def fast_gl_choice(**gl_overrides) -> CoarsenerChoice:
    """GL coarsener with small walks and embedding so tests stay quick"""
    gl = GLCoarsenerConfig(
        walks=WalkConfig(walks_per_node=2, walk_length=8),
        embedding=EmbeddingConfig(dimension=16, epochs=2),
        clustering=ClusterConfig(),
        **gl_overrides,
    )
    return CoarsenerChoice(kind=CoarsenerKind.GL, gl=gl)


@pytest.fixture(autouse=True)
def reset_solver_loggers():
    """Drop handlers bound to a captured stderr once a test ends"""
    yield
    for name in SOLVER_LOGGERS:
        logger = logging.getLogger(name)
        for handler in logger.handlers[:]:
            logger.removeHandler(handler)
            handler.close()
        logger.propagate = True
        logger.setLevel(logging.NOTSET)


@pytest.fixture
def lap1d():
    return laplacian_1d


@pytest.fixture
def poisson():
    def make(nx: int, ny: int = None, **kwargs):
        return poisson_2d(PoissonSpec(nx=nx, ny=ny or nx, **kwargs))
    return make


@pytest.fixture
def barbell():
    return graph_laplacian(10, barbell_edges())


@pytest.fixture
def five_node():
    """Path 0-1, triangle 1-2-3, tail 3-4"""
    return graph_laplacian(5, [(0, 1), (1, 2), (1, 3), (2, 3), (3, 4)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
