from typing import Optional

from pydantic import Field

from schemas.base import FrozenSchema, NormalizedEnum


class ClusterAlgorithm(NormalizedEnum):
    MINIBATCH = "minibatch"
    LLOYD = "lloyd"
    AUTO = "auto"

    @classmethod
    def _aliases(cls) -> dict:
        return {"minibatchkmeans": cls.MINIBATCH, "kmeans": cls.LLOYD, "fullbatch": cls.LLOYD}


class ClusterConfig(FrozenSchema):
    """K-Means settings; unset sizes are derived from the sample count"""
    n_clusters: Optional[int] = Field(None, ge=1, description="K; set by the coarsener when None")
    batch_size: Optional[int] = Field(None, ge=1, description="Mini-batch size b; None means n/15")
    max_iters: Optional[int] = Field(None, ge=0, description="Iterations t; None means 15*ceil(n/b)")
    centroid_tol: float = Field(1e-4, ge=0, description="Early exit on max centroid displacement")
    seed: int = Field(0, ge=0)
    algorithm: ClusterAlgorithm = ClusterAlgorithm.MINIBATCH
    lloyd_threshold: int = Field(10_000, ge=1, description="auto uses Lloyd up to this many samples")
