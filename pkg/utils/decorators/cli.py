import functools
import logging
import sys
import traceback
from typing import Callable, Dict, Optional, Type

from pydantic import ValidationError

from utils.exceptions.base import BaseAMGException, ValidationException
from utils.exceptions.io import InputOutputException, MatrixMarketException, ConfigFileException
from utils.exceptions.learning import CoarseningException
from utils.exceptions.numerics import NumericsException, ConvergenceException

# Setup logger
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_IO = 3


def cli_exception_handler(
    func: Optional[Callable] = None,
    include_traceback: bool = False,
    custom_handlers: Dict[Type[Exception], Callable[[Exception], int]] = None
):
    """
    Decorator turning solver exceptions raised by a CLI subcommand into exit codes.

    Known exceptions carry their own exit code; pydantic validation errors are
    usage errors (1); OSError is an I/O error (3). Anything else is wrapped in a
    NumericsException, logged, and reported as exit 1.

    Args:
        func: The function to decorate
        include_traceback: Whether to print the traceback to stderr
        custom_handlers: Optional mapping of exception type to a handler returning an exit code

    Example:
        @cli_exception_handler
        def run_solve(args) -> int:
            ...
    """
    custom_handlers = custom_handlers or {}

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except BaseAMGException as exc:
                log_cli_exception(exc, include_traceback)
                return exc.exit_code if exc.exit_code is not None else EXIT_USAGE
            except ValidationError as exc:
                wrapped_exc = ValidationException(
                    message=f"Invalid configuration: {exc.error_count()} error(s): {exc.errors()[0]['msg']}",
                    details={"errors": [_format_error(e) for e in exc.errors()]},
                    original_exception=exc
                )
                log_cli_exception(wrapped_exc, include_traceback)
                return EXIT_USAGE
            except OSError as exc:
                wrapped_exc = InputOutputException(
                    message=f"I/O error: {exc}",
                    path=getattr(exc, "filename", None),
                    original_exception=exc
                )
                log_cli_exception(wrapped_exc, include_traceback)
                return EXIT_IO
            except Exception as exc:
                for exc_type, handler in custom_handlers.items():
                    if isinstance(exc, exc_type):
                        return handler(exc)

                wrapped_exc = NumericsException(
                    message=f"Unexpected solver error: {str(exc)}",
                    original_exception=exc
                )
                log_cli_exception(wrapped_exc, include_traceback)
                return EXIT_USAGE

        return wrapper

    # This allows the decorator to be used with or without arguments
    if func is not None:
        return decorator(func)
    return decorator


def _format_error(error: dict) -> str:
    location = ".".join(str(part) for part in error.get("loc", ()))
    return f"{location}: {error.get('msg')}"


def log_cli_exception(exc: BaseAMGException, include_traceback: bool = False) -> None:
    """Log a solver exception with its structured payload and echo a one-line summary"""
    error_data = exc.to_dict()

    if isinstance(exc, (MatrixMarketException, ConfigFileException)) and exc.line_number is not None:
        error_data["line_number"] = exc.line_number

    if isinstance(exc, CoarseningException) and exc.stage:
        error_data["coarsening_stage"] = exc.stage

    # Non-convergence is an expected outcome of a run, not a fault
    log_level = logging.WARNING if isinstance(exc, ConvergenceException) else logging.ERROR

    logger.log(log_level, f"CLI Exception: {exc.__class__.__name__}",
               extra={"amg_data": error_data})

    print(f"error: {exc.message}", file=sys.stderr)
    if include_traceback and exc.original_exception is not None:
        traceback.print_exception(exc.original_exception, file=sys.stderr)
