from schemas.clustering import ClusterAlgorithm, ClusterConfig
from schemas.coarsening import CoarsenerChoice, CoarsenerKind, GLCoarsenerConfig
from schemas.embedding import EmbeddingConfig, TrainingMode
from schemas.problems import BenchmarkSpec, PoissonSpec, RhsKind
from schemas.smoothing import SmootherConfig, SmootherKind
from schemas.solver import SolveReport, SolverConfig
from schemas.walks import WalkConfig

__all__ = [
    "BenchmarkSpec",
    "ClusterAlgorithm",
    "ClusterConfig",
    "CoarsenerChoice",
    "CoarsenerKind",
    "EmbeddingConfig",
    "GLCoarsenerConfig",
    "PoissonSpec",
    "RhsKind",
    "SmootherConfig",
    "SmootherKind",
    "SolveReport",
    "SolverConfig",
    "TrainingMode",
    "WalkConfig",
]
