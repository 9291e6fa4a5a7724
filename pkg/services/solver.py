"""
Multigrid hierarchy setup, the recursive V-cycle and the outer solve loop.

The hierarchy is built once per AMGSolver and is read-only afterwards, so one
solver may serve any number of right-hand sides, including concurrently.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from schemas.solver import SolveReport, SolverConfig
from services.coarsening import build_coarsener
from services.smoothing import smooth
from services.sparse import (
    CsrMatrix,
    DenseVector,
    canonical,
    factorize_coarse,
    galerkin_product,
    inf_norm,
    residual,
    spmv,
    transpose,
)
from utils.decorators.timing import log_stage
from utils.exceptions.numerics import DimensionMismatchException

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Level:
    """Operator of one grid plus the transfers to the next coarser grid"""
    A: CsrMatrix
    P: Optional[CsrMatrix] = None
    R: Optional[CsrMatrix] = None

    @property
    def size(self) -> int:
        return int(self.A.shape[0])


@dataclass(frozen=True, eq=False)
class Hierarchy:
    levels: Tuple[Level, ...]
    coarse_solve: Callable[[DenseVector], DenseVector]
    coarse_method: str = "dense"
    warnings: Tuple[str, ...] = field(default_factory=tuple)
    stalled: bool = False

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def coarsest(self) -> int:
        return len(self.levels) - 1

    @property
    def level_sizes(self) -> list:
        return [level.size for level in self.levels]

    @property
    def grid_complexity(self) -> float:
        """Total unknowns over all levels relative to the finest level"""
        sizes = self.level_sizes
        return sum(sizes) / sizes[0] if sizes[0] else 1.0

    @property
    def operator_complexity(self) -> float:
        """Total nonzeros over all levels relative to the finest operator"""
        nnz = [level.A.nnz for level in self.levels]
        return sum(nnz) / nnz[0] if nnz[0] else 1.0


def _check_system(A: CsrMatrix, f: DenseVector) -> None:
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatchException(f"expected a square matrix, got {A.shape}",
                                         expected="square", actual=A.shape)
    if np.shape(f) != (A.shape[0],):
        raise DimensionMismatchException(
            f"right-hand side has shape {np.shape(f)}, matrix is {A.shape}",
            expected=(A.shape[0],), actual=np.shape(f),
        )


@log_stage("hierarchy")
def build_hierarchy(A: CsrMatrix, cfg: SolverConfig) -> Hierarchy:
    """
    Coarsen recursively with A_c = R A P, R = P^T, until a level has at most
    ``cfg.coarsest_size`` unknowns.

    When a coarsener fails to reduce the size the Galerkin level it produced
    becomes the coarsest one and a warning is recorded. The coarsest operator
    is LU-factorized once here, densely up to ``cfg.dense_coarse_limit``
    unknowns and with a sparse LU beyond.

    Raises:
        SingularMatrixException: the coarsest operator is singular
    """
    current = canonical(A)
    if current.shape[0] != current.shape[1]:
        raise DimensionMismatchException(f"expected a square matrix, got {current.shape}",
                                         expected="square", actual=current.shape)
    coarsener = build_coarsener(cfg.coarsener)
    levels = []
    warnings = []
    stalled = False

    while True:
        n = current.shape[0]
        if n <= cfg.coarsest_size:
            levels.append(Level(A=current))
            break
        if len(levels) + 1 >= cfg.max_levels:
            warnings.append(f"level limit {cfg.max_levels} reached with {n} unknowns on the coarsest level")
            levels.append(Level(A=current))
            break

        P = coarsener.prolongation(current)
        n_coarse = P.shape[1]
        if n_coarse == 0:
            warnings.append(f"coarsening produced no coarse unknowns at level {len(levels)}")
            levels.append(Level(A=current))
            stalled = True
            break

        R = transpose(P)
        A_coarse = galerkin_product(R, current, P)
        levels.append(Level(A=current, P=P, R=R))
        if n_coarse >= n:
            warnings.append(f"coarsening stalled at level {len(levels)}: {n_coarse} coarse >= {n} fine unknowns")
            levels.append(Level(A=A_coarse))
            stalled = True
            break
        current = A_coarse

    for message in warnings:
        logger.warning(message, extra={"amg_data": {"coarsener": cfg.coarsener.label}})

    coarse_method, coarse_solve = factorize_coarse(levels[-1].A, cfg.dense_coarse_limit)
    hierarchy = Hierarchy(
        levels=tuple(levels),
        coarse_solve=coarse_solve,
        coarse_method=coarse_method,
        warnings=tuple(warnings),
        stalled=stalled,
    )
    logger.info("Hierarchy built", extra={"amg_data": {
        "coarsener": cfg.coarsener.label,
        "level_sizes": hierarchy.level_sizes,
        "operator_complexity": hierarchy.operator_complexity,
        "coarse_method": coarse_method,
    }})
    return hierarchy


def v_cycle(h: Hierarchy, level: int, f: DenseVector, v: DenseVector, cfg: SolverConfig) -> DenseVector:
    """
    One V-cycle on ``level``: pre-smooth, restrict the residual, recurse from a
    zero guess (direct solve on the coarsest level), prolongate and correct,
    post-smooth.

    Post-smoothing runs on the finest level only unless
    ``cfg.post_smooth_all_levels`` is set.
    """
    if level == h.coarsest:
        return h.coarse_solve(f)

    current = h.levels[level]
    v = smooth(current.A, f, v, cfg.smoother.with_sweeps(cfg.pre_sweeps))
    r_coarse = spmv(current.R, residual(current.A, f, v))
    e_coarse = v_cycle(h, level + 1, r_coarse, np.zeros_like(r_coarse), cfg)
    v = v + spmv(current.P, e_coarse)
    if level == 0 or cfg.post_smooth_all_levels:
        v = smooth(current.A, f, v, cfg.smoother.with_sweeps(cfg.post_sweeps))
    return v


class AMGSolver:
    """
    Set up a hierarchy for A once and solve against it repeatedly.

    Example:
        solver = AMGSolver(A, SolverConfig(coarsener="vanek"))
        x, report = solver.solve(b)
    """

    def __init__(self, A: CsrMatrix, cfg: SolverConfig):
        self.cfg = cfg
        start = time.perf_counter()
        self.hierarchy = build_hierarchy(A, cfg)
        self.setup_seconds = time.perf_counter() - start

    @property
    def A(self) -> CsrMatrix:
        return self.hierarchy.levels[0].A

    def solve(self, f: DenseVector, v0: Optional[DenseVector] = None) -> Tuple[DenseVector, SolveReport]:
        """
        V-cycles until the residual infinity norm drops below the tolerance,
        ``max_vcycles`` runs out or the residual grows for
        ``divergence_window`` consecutive cycles.
        """
        cfg, A = self.cfg, self.A
        f = np.asarray(f, dtype=np.float64)
        _check_system(A, f)
        v = np.zeros_like(f) if v0 is None else np.array(v0, dtype=np.float64, copy=True)
        if v.shape != f.shape:
            raise DimensionMismatchException(f"initial guess has shape {v.shape}, expected {f.shape}",
                                             expected=f.shape, actual=v.shape)

        start = time.perf_counter()
        initial = inf_norm(residual(A, f, v))
        history = []
        converged = initial < cfg.tolerance
        diverged = False
        warnings = list(self.hierarchy.warnings)
        previous, increases = initial, 0

        while not converged and len(history) < cfg.max_vcycles:
            v = v_cycle(self.hierarchy, 0, f, v, cfg)
            norm = inf_norm(residual(A, f, v))
            history.append(norm)
            logger.debug("V-cycle", extra={"amg_data": {"cycle": len(history), "residual": norm}})
            if norm < cfg.tolerance:
                converged = True
                break
            increases = increases + 1 if not norm <= previous else 0
            if increases >= cfg.divergence_window or not np.isfinite(norm):
                diverged = True
                warnings.append(f"residual grew for {increases} consecutive cycles")
                logger.warning("Solve diverged", extra={"amg_data": {"cycle": len(history), "residual": norm}})
                break
            previous = norm

        report = SolveReport(
            iterations=len(history),
            residual_history=history,
            converged=converged,
            diverged=diverged,
            tolerance=cfg.tolerance,
            initial_residual=initial,
            setup_seconds=self.setup_seconds,
            solve_seconds=time.perf_counter() - start,
            level_sizes=self.hierarchy.level_sizes,
            grid_complexity=self.hierarchy.grid_complexity,
            operator_complexity=self.hierarchy.operator_complexity,
            warnings=warnings,
            method=cfg.coarsener.label,
        )
        logger.info("Solve finished", extra={"amg_data": {
            "method": report.method, "iterations": report.iterations,
            "converged": converged, "final_residual": report.final_residual}})
        return v, report


def solve(A: CsrMatrix, f: DenseVector, v0: Optional[DenseVector], cfg: SolverConfig) -> Tuple[DenseVector, SolveReport]:
    """Build the hierarchy once and iterate V-cycles from v0 (zero when None)"""
    _check_system(A, np.asarray(f))
    return AMGSolver(A, cfg).solve(f, v0)
