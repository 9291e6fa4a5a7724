from typing import Dict, Type

from schemas.coarsening import CoarsenerChoice, CoarsenerKind
from services.coarsening.base import (
    AggregateSet,
    Coarsener,
    CoarseningResult,
    prolongation_from_aggregates,
    smooth_prolongation,
)
from services.coarsening.beck import BeckCoarsener, beck_coarsen
from services.coarsening.gl import GLCoarsener, gl_coarsen
from services.coarsening.vanek import VanekCoarsener, vanek_coarsen

COARSENERS: Dict[CoarsenerKind, Type[Coarsener]] = {
    CoarsenerKind.GL: GLCoarsener,
    CoarsenerKind.VANEK: VanekCoarsener,
    CoarsenerKind.BECK: BeckCoarsener,
}


def build_coarsener(choice: CoarsenerChoice) -> Coarsener:
    return COARSENERS[choice.kind](choice)


__all__ = [
    "AggregateSet",
    "BeckCoarsener",
    "COARSENERS",
    "Coarsener",
    "CoarseningResult",
    "GLCoarsener",
    "VanekCoarsener",
    "beck_coarsen",
    "build_coarsener",
    "gl_coarsen",
    "prolongation_from_aggregates",
    "smooth_prolongation",
    "vanek_coarsen",
]
