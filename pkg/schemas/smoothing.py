from pydantic import Field

from schemas.base import FrozenSchema, NormalizedEnum


class SmootherKind(NormalizedEnum):
    """Stationary iteration used for cycle smoothing or prolongation smoothing"""
    JACOBI = "jacobi"
    DAMPED_JACOBI = "damped_jacobi"
    GAUSS_SEIDEL = "gauss_seidel"
    SOR = "sor"

    @classmethod
    def _aliases(cls) -> dict:
        return {"wjacobi": cls.DAMPED_JACOBI, "gs": cls.GAUSS_SEIDEL}


class SmootherConfig(FrozenSchema):
    """Smoother kind, relaxation parameter and sweep count"""
    kind: SmootherKind = Field(SmootherKind.JACOBI, description="Splitting used for each sweep")
    omega: float = Field(2.0 / 3.0, gt=0, lt=2, description="Damping (Jacobi) or relaxation (SOR) parameter")
    sweeps: int = Field(1, ge=0, description="Number of stationary updates")

    def with_sweeps(self, sweeps: int) -> "SmootherConfig":
        return self.model_copy(update={"sweeps": sweeps})
