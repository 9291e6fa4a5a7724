from typing import List

from pydantic import Field, field_validator

from schemas.base import FrozenSchema, NormalizedEnum, as_int_list, split_csv
from schemas.coarsening import CoarsenerChoice, CoarsenerKind


class RhsKind(NormalizedEnum):
    ZERO = "zero"
    ONES = "ones"
    MANUFACTURED_SIN = "manufactured_sin"

    @classmethod
    def _aliases(cls) -> dict:
        return {"sin": cls.MANUFACTURED_SIN, "manufactured": cls.MANUFACTURED_SIN}


class PoissonSpec(FrozenSchema):
    """5-point Poisson problem on the unit square, homogeneous Dirichlet boundary"""
    nx: int = Field(..., ge=1, description="Interior points in x")
    ny: int = Field(..., ge=1, description="Interior points in y")
    rhs: RhsKind = RhsKind.ONES


class BenchmarkSpec(FrozenSchema):
    """Sizes x methods x seeds sweep"""
    sizes: List[int] = Field(default_factory=lambda: [1024], min_length=1)
    methods: List[CoarsenerChoice] = Field(
        default_factory=lambda: [CoarsenerChoice(kind=k) for k in CoarsenerKind],
        min_length=1,
    )
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4], min_length=1)
    tolerance: float = Field(1e-4, gt=0)
    workers: int = Field(1, ge=1, description="Cells solved concurrently")

    @field_validator("sizes", "seeds", mode="before")
    @classmethod
    def split_int_lists(cls, value):
        value = split_csv(value)
        return as_int_list(value) if isinstance(value, list) else value

    @field_validator("methods", mode="before")
    @classmethod
    def split_methods(cls, value):
        return split_csv(value)

    @field_validator("sizes")
    @classmethod
    def check_sizes(cls, value: List[int]) -> List[int]:
        if any(size < 1 for size in value):
            raise ValueError("benchmark sizes must be positive")
        return value
