import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from schemas.coarsening import CoarsenerChoice
from schemas.problems import PoissonSpec, RhsKind
from schemas.solver import SolverConfig
from services.benchmark import format_csv, run_benchmark
from services.clustering import export_assignment
from services.coarsening import build_coarsener
from services.embedding import export_embedding
from services.matrix_market import format_matrix_market, read_matrix_market, read_vector, write_matrix_market, write_vector
from services.problems import poisson_2d, solution_error_inf
from services.solver import solve
from services.sparse import galerkin_product, transpose
from services.walks import dump_corpus
from utils.config import Settings, load_settings
from utils.decorators.cli import EXIT_OK, cli_exception_handler
from utils.exceptions.base import ValidationException
from utils.exceptions.io import InputOutputException
from utils.exceptions.numerics import ConvergenceException
from utils.logging import init_solver_logging

logger = logging.getLogger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors become exit code 1 instead of argparse's 2"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationException(f"{self.prog}: {message}")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="key=value configuration file")
    parser.add_argument("--method", help="Coarsener: gl, vanek or beck")
    parser.add_argument("--seed", type=int, help="Seed for walks, embedding and clustering")
    parser.add_argument("--log-level", help="Override GLAMG_LOG_LEVEL")


def _add_system(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("matrix", nargs="?", type=Path, help="Matrix Market coordinate file")
    source.add_argument("--poisson", nargs=2, type=int, metavar=("NX", "NY"),
                        help="Generate the 5-point Poisson system on an NX x NY grid")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="glamg", description="Algebraic multigrid with graph-learned coarsening")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    solve_parser = subparsers.add_parser("solve", help="Solve A x = f with V-cycles")
    _add_system(solve_parser)
    _add_common(solve_parser)
    solve_parser.add_argument("--rhs", type=RhsKind, default=RhsKind.ONES,
                              help="Poisson right-hand side: zero, ones or sin")
    solve_parser.add_argument("--rhs-file", type=Path, help="Right-hand side vector, one value per line")
    solve_parser.add_argument("--tol", type=float, help="Residual infinity-norm tolerance")
    solve_parser.add_argument("--max-cycles", type=int, help="V-cycle limit")
    solve_parser.add_argument("--output", type=Path, help="Write the solution vector here")
    solve_parser.add_argument("--report", type=Path, help="Write the key=value report here instead of stdout")
    solve_parser.set_defaults(handler=run_solve)

    bench_parser = subparsers.add_parser("bench", help="Poisson benchmark sweep to CSV")
    bench_parser.add_argument("--config", type=Path, help="key=value configuration file")
    bench_parser.add_argument("--out", type=Path, help="Write CSV here instead of stdout")
    bench_parser.add_argument("--log-level", help="Override GLAMG_LOG_LEVEL")
    bench_parser.set_defaults(handler=run_bench)

    coarsen_parser = subparsers.add_parser("coarsen", help="Build one prolongation operator")
    _add_system(coarsen_parser)
    _add_common(coarsen_parser)
    coarsen_parser.add_argument("--output", type=Path, help="Prolongation in Matrix Market format (stdout if absent)")
    coarsen_parser.add_argument("--coarse-output", type=Path, help="Galerkin coarse matrix P^T A P")
    coarsen_parser.add_argument("--dump-walks", type=Path, help="Walk corpus, one walk per line")
    coarsen_parser.add_argument("--dump-embedding", type=Path, help="Embedding, header 'n d' then rows")
    coarsen_parser.add_argument("--dump-assignment", type=Path, help="'node cluster' lines")
    coarsen_parser.set_defaults(handler=run_coarsen)
    return parser


def _log_level_override(args: argparse.Namespace) -> Optional[str]:
    level = getattr(args, "log_level", None)
    return level.upper() if level else None


def _settings_from(args: argparse.Namespace) -> Settings:
    overrides: Dict[str, Any] = {
        "coarsener.kind": getattr(args, "method", None),
        "tolerance": getattr(args, "tol", None),
        "max_vcycles": getattr(args, "max_cycles", None),
        "log_level": _log_level_override(args),
    }
    settings = load_settings(args.config, overrides)
    init_solver_logging(settings.logging)
    if getattr(args, "seed", None) is not None:
        solver = settings.solver.model_copy(update={"coarsener": settings.solver.coarsener.with_seed(args.seed)})
        settings = settings.model_copy(update={"solver": solver})
    return settings


def _load_system(args: argparse.Namespace, rhs: RhsKind = RhsKind.ONES):
    """Matrix, right-hand side and the Poisson spec (None for file input)"""
    if args.poisson:
        spec = PoissonSpec(nx=args.poisson[0], ny=args.poisson[1], rhs=rhs)
        A, f = poisson_2d(spec)
        return A, f, spec
    A = read_matrix_market(args.matrix)
    rhs_file = getattr(args, "rhs_file", None)
    f = read_vector(rhs_file) if rhs_file else np.ones(A.shape[0])
    return A, f, None


def _emit(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        path.write_text(text)
    except OSError as e:
        raise InputOutputException(f"cannot write {path}: {e}", path=path, original_exception=e)


def run_solve(args: argparse.Namespace) -> int:
    settings = _settings_from(args)
    cfg: SolverConfig = settings.solver
    A, f, spec = _load_system(args, args.rhs)

    x, report = solve(A, f, None, cfg)
    if args.output:
        write_vector(args.output, x)

    text = report.to_key_value()
    if spec is not None and spec.rhs == RhsKind.MANUFACTURED_SIN:
        text += f"solution_error_inf={solution_error_inf(x, spec):.6e}\n"
    _emit(text, args.report)

    if not report.converged:
        raise ConvergenceException(
            "solver diverged" if report.diverged else f"no convergence within {cfg.max_vcycles} V-cycles",
            iterations=report.iterations, residual=report.final_residual,
        )
    return EXIT_OK


def run_bench(args: argparse.Namespace) -> int:
    settings = load_settings(args.config, {"log_level": _log_level_override(args)})
    init_solver_logging(settings.logging)
    spec = settings.benchmark
    # stage settings from the file apply to every method; only the kind varies
    methods: List[CoarsenerChoice] = [
        settings.solver.coarsener.model_copy(update={"kind": method.kind}) for method in spec.methods
    ]
    rows = run_benchmark(spec.model_copy(update={"methods": methods}), settings.solver)
    _emit(format_csv(rows), args.out)
    return EXIT_OK


def run_coarsen(args: argparse.Namespace) -> int:
    settings = _settings_from(args)
    A, _, _ = _load_system(args)
    result = build_coarsener(settings.solver.coarsener).run(A)
    P = result.prolongation

    if args.output:
        write_matrix_market(args.output, P)
    else:
        sys.stdout.write(format_matrix_market(P))
    if args.coarse_output:
        write_matrix_market(args.coarse_output, galerkin_product(transpose(P), A, P))

    dumps = (
        (args.dump_walks, result.corpus, dump_corpus),
        (args.dump_embedding, result.embedding, export_embedding),
        (args.dump_assignment, result.aggregates and result.aggregates.assignment, export_assignment),
    )
    for path, artifact, writer in dumps:
        if path is None:
            continue
        if artifact is None:
            logger.warning("Nothing to dump for this coarsener",
                           extra={"amg_data": {"path": str(path), "coarsener": settings.solver.coarsener.label}})
            continue
        writer(artifact, path)
    return EXIT_OK


@cli_exception_handler
def cli_main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code"""
    init_solver_logging()
    args = build_parser().parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(cli_main())
