from utils.logging.solver import (
    JSONFormatter,
    init_solver_logging,
    setup_solver_logging,
)

__all__ = ["JSONFormatter", "init_solver_logging", "setup_solver_logging"]
