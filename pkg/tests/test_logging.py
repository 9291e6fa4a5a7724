import json
import logging
import sys

import pytest

from schemas.solver import SolverConfig
from utils.decorators.cli import EXIT_IO, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE, cli_exception_handler
from utils.decorators.timing import log_stage
from utils.exceptions.io import MatrixMarketException
from utils.exceptions.learning import CoarseningException
from utils.exceptions.numerics import ConvergenceException
from utils.logging import JSONFormatter, setup_solver_logging


def _record(**extra) -> logging.LogRecord:
    record = logging.LogRecord("services.solver", logging.INFO, __file__, 10, "Solve finished", None, None)
    for key, value in extra.items():
        setattr(record, key, value)
    return record


class TestJSONFormatter:

    def test_payload(self):
        payload = json.loads(JSONFormatter().format(_record(amg_data={"iterations": 12, "converged": True})))
        assert payload["message"] == "Solve finished"
        assert payload["level"] == "INFO"
        assert payload["logger"] == "services.solver"
        assert payload["amg_data"] == {"iterations": 12, "converged": True}

    def test_unserializable_extra(self):
        payload = json.loads(JSONFormatter().format(_record(level_sizes={1, 2})))
        assert isinstance(payload["level_sizes"], str)

    def test_exception_info(self):
        try:
            raise ValueError("bad pivot")
        except ValueError:
            record = _record()
            record.exc_info = sys.exc_info()
        payload = json.loads(JSONFormatter().format(record))
        assert payload["exception"]["type"] == "ValueError"


class TestSetup:

    def test_levels_and_handlers(self):
        setup_solver_logging(log_level="DEBUG", json_format=False)
        services_logger = logging.getLogger("services")
        assert services_logger.level == logging.DEBUG
        assert len(services_logger.handlers) == 1
        assert not services_logger.propagate
        setup_solver_logging(log_level="WARNING")
        assert len(services_logger.handlers) == 1
        assert isinstance(services_logger.handlers[0].formatter, JSONFormatter)

    def test_log_file(self, tmp_path):
        setup_solver_logging(log_level="INFO", log_to_file=True, log_dir=str(tmp_path / "logs"))
        logging.getLogger("services.benchmark").info("cell", extra={"amg_data": {"size": 16}})
        for handler in logging.getLogger("services").handlers:
            handler.flush()
        lines = (tmp_path / "logs" / "solver.log").read_text().splitlines()
        assert json.loads(lines[-1])["amg_data"] == {"size": 16}
        setup_solver_logging(log_level="WARNING")


class TestCliExceptionHandler:

    @pytest.mark.parametrize("exc,code", [
        (ConvergenceException("no convergence", iterations=3), EXIT_NOT_CONVERGED),
        (MatrixMarketException("cannot parse entry", line_number=4), EXIT_IO),
        (CoarseningException("embedding stage failed", stage="embedding"), EXIT_USAGE),
        (FileNotFoundError(2, "No such file", "a.mtx"), EXIT_IO),
        (RuntimeError("boom"), EXIT_USAGE),
    ])
    def test_exit_codes(self, exc, code, capsys):
        @cli_exception_handler
        def command():
            raise exc

        assert command() == code
        assert "error: " in capsys.readouterr().err

    def test_validation_error(self):
        @cli_exception_handler
        def command():
            SolverConfig(tolerance=-1.0)

        assert command() == EXIT_USAGE

    def test_passes_through_return_value(self):
        assert cli_exception_handler(lambda: EXIT_OK)() == EXIT_OK

    def test_custom_handler(self):
        @cli_exception_handler(custom_handlers={KeyError: lambda exc: 9})
        def command():
            raise KeyError("method")

        assert command() == 9

    def test_line_number_in_message(self, capsys):
        @cli_exception_handler
        def command():
            raise MatrixMarketException("expected 3 fields, got 2", line_number=7)

        command()
        assert "line 7: expected 3 fields" in capsys.readouterr().err


class TestLogStage:

    def test_result_and_errors(self):
        @log_stage("walks")
        def stage(x):
            if x < 0:
                raise CoarseningException("negative", stage="walks")
            return 2 * x

        assert stage(3) == 6
        with pytest.raises(CoarseningException):
            stage(-1)
        assert stage.__name__ == "stage"
