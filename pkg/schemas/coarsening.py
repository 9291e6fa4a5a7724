from typing import Any, Optional

from pydantic import Field, model_validator

from schemas.base import FrozenSchema, NormalizedEnum
from schemas.clustering import ClusterConfig
from schemas.embedding import EmbeddingConfig
from schemas.smoothing import SmootherConfig
from schemas.walks import WalkConfig


class CoarsenerKind(NormalizedEnum):
    GL = "gl"
    VANEK = "vanek"
    BECK = "beck"

    @classmethod
    def _aliases(cls) -> dict:
        return {
            "glcoarsener": cls.GL,
            "vanekaggregation": cls.VANEK,
            "vaněk": cls.VANEK,
            "standardaggregation": cls.VANEK,
        }


class GLCoarsenerConfig(FrozenSchema):
    """Walk, embedding and clustering stages of the graph-learning coarsener"""
    walks: WalkConfig = Field(default_factory=WalkConfig)
    embedding: EmbeddingConfig = Field(default_factory=EmbeddingConfig)
    clustering: ClusterConfig = Field(default_factory=ClusterConfig)
    cluster_ratio: float = Field(5.0, gt=1, description="Fine nodes per cluster; K = floor(n / ratio)")


class CoarsenerChoice(FrozenSchema):
    """Which coarsener builds each level's prolongation, and how"""
    kind: CoarsenerKind = CoarsenerKind.GL
    gl: GLCoarsenerConfig = Field(default_factory=GLCoarsenerConfig)
    vanek_epsilon: float = Field(0.08, ge=0, description="Strong-coupling threshold")
    prolongation_smoothing: Optional[SmootherConfig] = Field(
        None, description="Smoothed prolongation variant; None keeps the piecewise-constant operator"
    )

    @model_validator(mode="before")
    @classmethod
    def accept_kind_shorthand(cls, data: Any) -> Any:
        # "vanek" -> CoarsenerChoice(kind="vanek")
        if isinstance(data, (str, CoarsenerKind)):
            return {"kind": data}
        return data

    @property
    def label(self) -> str:
        return self.kind.value

    def with_seed(self, seed: int) -> "CoarsenerChoice":
        """Same choice with every stochastic stage reseeded"""
        gl = self.gl.model_copy(update={
            "walks": self.gl.walks.model_copy(update={"seed": seed}),
            "embedding": self.gl.embedding.model_copy(update={"seed": seed}),
            "clustering": self.gl.clustering.model_copy(update={"seed": seed}),
        })
        return self.model_copy(update={"gl": gl})
