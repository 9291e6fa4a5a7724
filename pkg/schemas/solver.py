from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from schemas.base import FrozenSchema
from schemas.coarsening import CoarsenerChoice
from schemas.smoothing import SmootherConfig


class SolverConfig(FrozenSchema):
    """V-cycle and outer iteration settings"""
    pre_sweeps: int = Field(2, ge=0)
    post_sweeps: int = Field(7, ge=0)
    smoother: SmootherConfig = Field(default_factory=SmootherConfig)
    coarsest_size: int = Field(20, ge=1, description="Direct solve at or below this many unknowns")
    max_vcycles: int = Field(10_000, ge=1)
    tolerance: float = Field(1e-4, gt=0, description="Stop when the residual infinity norm drops below this")
    coarsener: CoarsenerChoice = Field(default_factory=CoarsenerChoice)
    post_smooth_all_levels: bool = Field(
        False, description="Apply post-smoothing on every level instead of only the finest"
    )
    max_levels: int = Field(50, ge=1)
    divergence_window: int = Field(5, ge=1, description="Consecutive residual increases that abort a solve")
    dense_coarse_limit: int = Field(
        2000, ge=1, description="Largest coarsest level solved by dense LU; bigger ones (stalls, level limit) use sparse LU"
    )


class SolveReport(BaseModel):
    """Outcome of one solve call"""
    iterations: int = 0
    residual_history: List[float] = Field(default_factory=list)
    converged: bool = False
    diverged: bool = False
    tolerance: float = 1e-4
    initial_residual: float = 0.0
    setup_seconds: float = 0.0
    solve_seconds: float = 0.0
    level_sizes: List[int] = Field(default_factory=list)
    grid_complexity: float = 1.0
    operator_complexity: float = 1.0
    warnings: List[str] = Field(default_factory=list)
    method: Optional[str] = None

    @model_validator(mode='after')
    def check_history(self) -> 'SolveReport':
        if len(self.residual_history) != self.iterations:
            raise ValueError("residual_history length must equal iterations")
        return self

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else self.initial_residual

    def to_key_value(self) -> str:
        """Line-oriented key=value block"""
        lines = [
            f"method={self.method or ''}",
            f"converged={str(self.converged).lower()}",
            f"diverged={str(self.diverged).lower()}",
            f"iterations={self.iterations}",
            f"tolerance={self.tolerance:.6g}",
            f"initial_residual={self.initial_residual:.6e}",
            f"final_residual={self.final_residual:.6e}",
            f"setup_seconds={self.setup_seconds:.6f}",
            f"solve_seconds={self.solve_seconds:.6f}",
            f"levels={len(self.level_sizes)}",
            f"level_sizes={','.join(str(n) for n in self.level_sizes)}",
            f"grid_complexity={self.grid_complexity:.4f}",
            f"operator_complexity={self.operator_complexity:.4f}",
            f"residual_history={','.join(f'{r:.6e}' for r in self.residual_history)}",
        ]
        lines.extend(f"warning={w}" for w in self.warnings)
        return "\n".join(lines) + "\n"

    def to_csv_row(self, size: int, method: str, seed: int) -> List[str]:
        """Row matching services.benchmark.CSV_COLUMNS"""
        return [
            str(size),
            method,
            str(seed),
            str(self.iterations),
            str(self.converged).lower(),
            f"{self.setup_seconds:.6f}",
            f"{self.solve_seconds:.6f}",
        ]
