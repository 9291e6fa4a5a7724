from typing import Optional

from pydantic import Field

from schemas.base import FrozenSchema


class WalkConfig(FrozenSchema):
    """Second-order (p, q) random walk parameters"""
    walks_per_node: Optional[int] = Field(
        None, ge=1,
        description="Walks started from every node; None means ceil(2 x average degree)"
    )
    walk_length: int = Field(10, ge=2, description="Nodes per walk, start node included")
    return_p: float = Field(0.1, gt=0, description="Return parameter p")
    in_out_q: float = Field(1.0, gt=0, description="In-out parameter q")
    seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1, description="Threads generating walks; output order is fixed")

    @classmethod
    def deepwalk(cls, **kwargs) -> "WalkConfig":
        """Unbiased first-order walks (p = q = 1)"""
        return cls(return_p=1.0, in_out_q=1.0, **kwargs)
