import csv
import io
import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

from schemas.coarsening import CoarsenerChoice
from schemas.problems import BenchmarkSpec, PoissonSpec, RhsKind
from schemas.solver import SolveReport, SolverConfig
from services.problems import grid_for_size, poisson_2d
from services.solver import solve
from utils.exceptions.base import BaseAMGException

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["size", "method", "seed", "iterations", "converged", "setup_seconds", "solve_seconds"]
AGGREGATE_SEED = "median"


@dataclass(frozen=True)
class BenchmarkCell:
    """Outcome of one (size, method, seed) solve"""
    size: int
    method: str
    seed: int
    report: Optional[SolveReport] = None
    error: Optional[str] = None

    @property
    def converged(self) -> bool:
        return self.report is not None and self.report.converged

    @property
    def iterations(self) -> int:
        return self.report.iterations if self.report else 0

    def to_row(self) -> List[str]:
        if self.report is None:
            return [str(self.size), self.method, str(self.seed), "0", "false", "0.000000", "0.000000"]
        return self.report.to_csv_row(self.size, self.method, self.seed)


def _run_cell(size: int, choice: CoarsenerChoice, seed: int, base: SolverConfig,
              tolerance: float) -> BenchmarkCell:
    nx, ny = grid_for_size(size)
    A, f = poisson_2d(PoissonSpec(nx=nx, ny=ny, rhs=RhsKind.ONES))
    n = A.shape[0]
    cfg = base.model_copy(update={"coarsener": choice.with_seed(seed), "tolerance": tolerance})
    try:
        _, report = solve(A, f, None, cfg)
    except BaseAMGException as e:
        logger.warning("Benchmark cell failed", extra={"amg_data": {
            "size": n, "method": choice.label, "seed": seed, "error": e.to_dict()}})
        return BenchmarkCell(size=n, method=choice.label, seed=seed, error=e.message)
    except Exception as e:
        # numpy/scipy failures are recorded like any other failed cell
        logger.error("Benchmark cell raised", exc_info=True, extra={"amg_data": {
            "size": n, "method": choice.label, "seed": seed, "error": f"{e.__class__.__name__}: {e}"}})
        return BenchmarkCell(size=n, method=choice.label, seed=seed, error=str(e))
    logger.info("Benchmark cell finished", extra={"amg_data": {
        "size": n, "method": choice.label, "seed": seed,
        "iterations": report.iterations, "converged": report.converged}})
    return BenchmarkCell(size=n, method=choice.label, seed=seed, report=report)


def aggregate_row(cells: Sequence[BenchmarkCell]) -> List[str]:
    """Median iterations and timings over the seeds of one (size, method)"""
    first = cells[0]
    setup = [c.report.setup_seconds if c.report else 0.0 for c in cells]
    solve_times = [c.report.solve_seconds if c.report else 0.0 for c in cells]
    return [
        str(first.size),
        first.method,
        AGGREGATE_SEED,
        f"{statistics.median(c.iterations for c in cells):g}",
        str(all(c.converged for c in cells)).lower(),
        f"{statistics.median(setup):.6f}",
        f"{statistics.median(solve_times):.6f}",
    ]


def run_benchmark(spec: BenchmarkSpec, base: Optional[SolverConfig] = None) -> List[List[str]]:
    """
    Solve every (size, method, seed) Poisson cell from v0 = 0 with f = ones.

    Rows come out ordered by size, method (in configured order) and seed, each
    (size, method) group followed by its median row. Failed solves become
    converged=false rows.
    """
    base = base or SolverConfig()
    tasks = [
        (size, choice, seed)
        for size in sorted(set(spec.sizes))
        for choice in spec.methods
        for seed in sorted(set(spec.seeds))
    ]

    def run(task) -> BenchmarkCell:
        size, choice, seed = task
        return _run_cell(size, choice, seed, base, spec.tolerance)

    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            cells = list(pool.map(run, tasks))
    else:
        cells = [run(task) for task in tasks]

    rows = []
    per_group = len(set(spec.seeds))
    for start in range(0, len(cells), per_group):
        group = cells[start:start + per_group]
        rows.extend(cell.to_row() for cell in group)
        rows.append(aggregate_row(group))
    return rows


def format_csv(rows: Sequence[Sequence[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    return buffer.getvalue()
