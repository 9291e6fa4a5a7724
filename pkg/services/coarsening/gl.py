import logging
import math
from contextlib import contextmanager

from schemas.coarsening import CoarsenerChoice
from services.clustering import minibatch_kmeans
from services.coarsening.base import AggregateSet, Coarsener, CoarseningResult, prolongation_from_aggregates
from services.embedding import initial_embedding, train_embedding
from services.graph import graph_from_matrix
from services.sparse import CsrMatrix
from services.walks import generate_walks
from utils.decorators.timing import log_stage
from utils.exceptions.base import BaseAMGException
from utils.exceptions.io import InputOutputException
from utils.exceptions.learning import CoarseningException

logger = logging.getLogger(__name__)


@contextmanager
def _stage(name: str):
    try:
        yield
    except (CoarseningException, InputOutputException):
        raise
    except BaseAMGException as e:
        raise CoarseningException(f"{name} stage failed: {e.message}", stage=name,
                                  original_exception=e) from e


def target_clusters(n: int, cluster_ratio: float) -> int:
    """K = max(1, floor(n / ratio))"""
    return max(1, math.floor(n / cluster_ratio))


class GLCoarsener(Coarsener):
    """
    Aggregates nodes that land close together in a random-walk embedding of
    the matrix graph: walks, skip-gram embedding, then K-Means in the
    embedding space. One cluster becomes one coarse node.
    """

    def tentative(self, A: CsrMatrix) -> CoarseningResult:
        n = A.shape[0]
        if n < 2:
            raise CoarseningException(f"cannot coarsen a level with {n} unknowns", stage="aggregation")
        cfg = self.choice.gl
        K = target_clusters(n, cfg.cluster_ratio)

        with _stage("walks"):
            graph = graph_from_matrix(A)
            corpus = generate_walks(graph, cfg.walks)

        with _stage("embedding"):
            if corpus.is_empty:
                # no edges at all; every node keeps its random initial vector
                logger.warning("Matrix graph has no edges, clustering the initial embedding",
                               extra={"amg_data": {"n": n}})
                embedding = initial_embedding(n, cfg.embedding)
            else:
                embedding = train_embedding(corpus, n, cfg.embedding)

        with _stage("clustering"):
            _, assignment = minibatch_kmeans(
                embedding.in_vectors, cfg.clustering.model_copy(update={"n_clusters": K}))

        aggregates = AggregateSet(n_fine=n, n_coarse=K, assignment=assignment)
        return CoarseningResult(
            prolongation=prolongation_from_aggregates(aggregates),
            aggregates=aggregates,
            corpus=corpus,
            embedding=embedding,
        )


@log_stage("gl_coarsening")
def gl_coarsen(A: CsrMatrix, choice: CoarsenerChoice) -> CsrMatrix:
    """
    Prolongation from the graph-learning pipeline, smoothed when
    ``choice.prolongation_smoothing`` is set. Deterministic for fixed seeds
    in sequential training mode.
    """
    return GLCoarsener(choice).prolongation(A)
