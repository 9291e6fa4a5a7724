import logging
import json
import sys
import os
from datetime import datetime, timezone
from pathlib import Path

# Loggers configured by setup; modules log via logging.getLogger(__name__)
SOLVER_LOGGERS = ("services", "utils", "main")

_RESERVED = {
    "name", "msg", "args", "levelname", "levelno", "pathname", "filename",
    "module", "exc_info", "exc_text", "stack_info", "lineno", "funcName",
    "created", "msecs", "relativeCreated", "thread", "threadName",
    "processName", "process", "message", "taskName", "amg_data",
}


class JSONFormatter(logging.Formatter):
    """Custom JSON formatter for structured logging"""
    def format(self, record):
        log_record = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        # Add traceback if exception occurred
        if record.exc_info:
            log_record["exception"] = {
                "type": record.exc_info[0].__name__,
                "message": str(record.exc_info[1]),
                "traceback": self.formatException(record.exc_info)
            }

        # Solver payload (hierarchy sizes, timings, residuals, error dicts)
        if hasattr(record, "amg_data"):
            log_record["amg_data"] = record.amg_data

        # Add any other extra fields
        for key, value in record.__dict__.items():
            if key not in _RESERVED and not key.startswith("_"):
                try:
                    json.dumps({key: value})  # Test JSON serialization
                    log_record[key] = value
                except (TypeError, OverflowError):
                    log_record[key] = str(value)

        return json.dumps(log_record, default=str)


def setup_solver_logging(
    log_level: str = "INFO",
    log_to_file: bool = False,
    log_dir: str = "logs",
    json_format: bool = True
):
    """
    Configure solver logging

    Args:
        log_level: Minimum log level to capture
        log_to_file: Whether to log to file
        log_dir: Directory for log files
        json_format: Whether to use JSON formatting
    """
    numeric_level = getattr(logging, str(log_level).upper(), logging.INFO)

    if json_format:
        formatter = JSONFormatter()
    else:
        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    # Diagnostics go to stderr so CSV and reports on stdout stay clean
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(numeric_level)
    console_handler.setFormatter(formatter)

    file_handler = None
    if log_to_file:
        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path / "solver.log")
        file_handler.setLevel(numeric_level)
        file_handler.setFormatter(formatter)

    for name in SOLVER_LOGGERS:
        logger = logging.getLogger(name)
        logger.setLevel(numeric_level)
        for handler in logger.handlers[:]:
            logger.removeHandler(handler)
        logger.addHandler(console_handler)
        if file_handler is not None:
            logger.addHandler(file_handler)
        logger.propagate = False

    solver_logger = logging.getLogger("services")
    solver_logger.debug("Solver logging configured")
    return solver_logger


def init_solver_logging(log_settings=None):
    """Initialize solver logging from LoggingSettings (environment only when none is given)"""
    if log_settings is None:
        from utils.config import LoggingSettings
        log_settings = LoggingSettings()
    env = os.getenv("APP_ENV", "development")
    json_format = log_settings.JSON_LOGS if env != "development" else False

    return setup_solver_logging(
        log_level=log_settings.LOG_LEVEL.value,
        log_to_file=log_settings.LOG_TO_FILE,
        log_dir=log_settings.LOG_DIR,
        json_format=json_format
    )
