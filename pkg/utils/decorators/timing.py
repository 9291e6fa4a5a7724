import functools
import logging
import time
from typing import Callable

logger = logging.getLogger(__name__)


def log_stage(stage: str) -> Callable:
    """
    Decorator logging the wall time of a pipeline stage at DEBUG level.

    Failures are logged with the stage name and re-raised unchanged.

    Example:
        @log_stage("walks")
        def generate_walks(graph, cfg): ...
    """
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as exc:
                logger.debug(
                    f"Stage {stage} failed",
                    extra={"amg_data": {"stage": stage, "error": str(exc),
                                        "seconds": time.perf_counter() - start}}
                )
                raise
            logger.debug(
                f"Stage {stage} finished",
                extra={"amg_data": {"stage": stage, "seconds": time.perf_counter() - start}}
            )
            return result
        return wrapper
    return decorator
