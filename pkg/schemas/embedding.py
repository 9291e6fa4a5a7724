from pydantic import Field, model_validator

from schemas.base import FrozenSchema, NormalizedEnum


class TrainingMode(NormalizedEnum):
    SEQUENTIAL = "sequential"
    PARALLEL = "parallel"


class EmbeddingConfig(FrozenSchema):
    """Skip-gram with negative sampling hyper-parameters"""
    dimension: int = Field(128, ge=1, description="Embedding dimension d")
    window: int = Field(5, ge=1, description="Context radius in walk positions")
    negatives: int = Field(5, ge=1, description="Negative samples k per positive pair")
    epochs: int = Field(5, ge=0)
    lr_initial: float = Field(0.025, gt=0)
    lr_final: float = Field(0.0001, gt=0)
    batch_pairs: int = Field(256, ge=1, description="Pairs sharing one parameter snapshot; 1 is plain SGD")
    seed: int = Field(0, ge=0)
    mode: TrainingMode = Field(TrainingMode.SEQUENTIAL, description="parallel trades determinism for speed")
    workers: int = Field(4, ge=1, description="Threads used in parallel mode")

    @model_validator(mode='after')
    def check_learning_rate_schedule(self) -> 'EmbeddingConfig':
        if self.lr_initial < self.lr_final:
            raise ValueError("lr_initial must be >= lr_final")
        return self
