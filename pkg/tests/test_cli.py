import logging

import numpy as np
import pytest

from main import build_parser, cli_main
from services.matrix_market import read_matrix_market, read_vector
from utils.decorators.cli import EXIT_IO, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE

HEADER = "size,method,seed,iterations,converged,setup_seconds,solve_seconds"

SMALL_GL = """\
# tiny graph-learning stages
walks.walks_per_node=2
walks.walk_length=6
embedding.dimension=4
embedding.epochs=1
"""


@pytest.fixture
def config_file(tmp_path):
    def write(text: str):
        path = tmp_path / "glamg.cfg"
        path.write_text(text)
        return str(path)
    return write


class TestSolveCommand:

    def test_poisson_converges(self, capsys):
        assert cli_main(["solve", "--poisson", "16", "16", "--method", "vanek", "--tol", "1e-4"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "converged=true" in out
        assert "method=vanek" in out
        assert "level_sizes=256," in out

    def test_matrix_file(self, tmp_path, capsys):
        path = tmp_path / "lap.mtx"
        path.write_text(
            "%%MatrixMarket matrix coordinate real symmetric\n"
            "3 3 5\n1 1 2\n2 2 2\n3 3 2\n2 1 -1\n3 2 -1\n"
        )
        out_path = tmp_path / "x.txt"
        assert cli_main(["solve", str(path), "--output", str(out_path)]) == EXIT_OK
        np.testing.assert_allclose(read_vector(out_path), [1.5, 2.0, 1.5])
        assert "levels=1" in capsys.readouterr().out

    def test_malformed_matrix_file(self, tmp_path, capsys):
        path = tmp_path / "bad.mtx"
        path.write_text("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n")
        assert cli_main(["solve", str(path)]) == EXIT_IO
        assert "line 3" in capsys.readouterr().err

    def test_missing_matrix_file(self, tmp_path):
        assert cli_main(["solve", str(tmp_path / "absent.mtx")]) == EXIT_IO

    def test_not_converged(self, capsys):
        code = cli_main(["solve", "--poisson", "16", "16", "--method", "vanek", "--max-cycles", "1", "--tol", "1e-12"])
        assert code == EXIT_NOT_CONVERGED
        assert "converged=false" in capsys.readouterr().out

    def test_report_and_solution_files(self, tmp_path, capsys):
        report, solution = tmp_path / "report.txt", tmp_path / "x.txt"
        code = cli_main(["solve", "--poisson", "8", "8", "--method", "beck",
                         "--report", str(report), "--output", str(solution)])
        assert code == EXIT_OK
        assert capsys.readouterr().out == ""
        assert "converged=true" in report.read_text()
        assert read_vector(solution).shape == (64,)

    def test_manufactured_rhs_reports_error(self, capsys):
        assert cli_main(["solve", "--poisson", "8", "8", "--method", "vanek", "--rhs", "sin"]) == EXIT_OK
        assert "solution_error_inf=" in capsys.readouterr().out

    def test_log_level_from_config_file(self, config_file, capsys):
        cfg = config_file("log_level=DEBUG\ntolerance=1e-4\n")
        assert cli_main(["solve", "--poisson", "8", "8", "--method", "vanek", "--config", cfg]) == EXIT_OK
        assert logging.getLogger("services").level == logging.DEBUG
        assert "DEBUG" in capsys.readouterr().err

    def test_log_level_flag_beats_config_file(self, config_file):
        cfg = config_file("log_level=DEBUG\n")
        args = ["solve", "--poisson", "8", "8", "--method", "vanek", "--config", cfg, "--log-level", "error"]
        assert cli_main(args) == EXIT_OK
        assert logging.getLogger("services").level == logging.ERROR

    def test_invalid_tolerance(self):
        assert cli_main(["solve", "--poisson", "4", "4", "--tol", "-1"]) == EXIT_USAGE

    def test_needs_a_system(self):
        assert cli_main(["solve", "--method", "vanek"]) == EXIT_USAGE

    def test_matrix_and_poisson_are_exclusive(self, tmp_path):
        assert cli_main(["solve", str(tmp_path / "a.mtx"), "--poisson", "4", "4"]) == EXIT_USAGE


class TestBenchCommand:

    def test_csv_header(self, config_file, capsys):
        cfg = config_file("benchmark.sizes=16\nbenchmark.methods=vanek,beck\nbenchmark.seeds=0\n")
        assert cli_main(["bench", "--config", cfg]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == HEADER
        assert len(lines) == 5
        assert lines[1].startswith("16,vanek,0,")

    def test_out_file(self, config_file, tmp_path):
        cfg = config_file("benchmark.sizes=16\nbenchmark.methods=beck\nbenchmark.seeds=0,1\n")
        out = tmp_path / "bench.csv"
        assert cli_main(["bench", "--config", cfg, "--out", str(out)]) == EXIT_OK
        assert out.read_text().splitlines()[0] == HEADER
        assert out.read_text().splitlines()[3].startswith("16,beck,median,")

    def test_bad_config_line(self, config_file, capsys):
        cfg = config_file("benchmark.sizes=16\nthis is not a pair\n")
        assert cli_main(["bench", "--config", cfg]) == EXIT_IO
        assert "line 2" in capsys.readouterr().err


class TestCoarsenCommand:

    def test_prolongation_to_stdout(self, capsys):
        assert cli_main(["coarsen", "--poisson", "4", "4", "--method", "beck"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("%%MatrixMarket matrix coordinate real general")

    def test_gl_dumps(self, config_file, tmp_path):
        cfg = config_file(SMALL_GL)
        paths = {name: tmp_path / name for name in ("P.mtx", "Ac.mtx", "walks.txt", "emb.txt", "assign.txt")}
        code = cli_main([
            "coarsen", "--poisson", "4", "4", "--config", cfg, "--seed", "7",
            "--output", str(paths["P.mtx"]), "--coarse-output", str(paths["Ac.mtx"]),
            "--dump-walks", str(paths["walks.txt"]), "--dump-embedding", str(paths["emb.txt"]),
            "--dump-assignment", str(paths["assign.txt"]),
        ])
        assert code == EXIT_OK
        assert read_matrix_market(paths["P.mtx"]).shape == (16, 3)
        assert read_matrix_market(paths["Ac.mtx"]).shape == (3, 3)
        assert len(paths["walks.txt"].read_text().splitlines()) == 32
        assert paths["emb.txt"].read_text().splitlines()[0] == "16 4"
        assert len(paths["assign.txt"].read_text().splitlines()) == 16

    def test_dump_without_artifact(self, tmp_path):
        walks = tmp_path / "walks.txt"
        assert cli_main(["coarsen", "--poisson", "4", "4", "--method", "vanek", "--dump-walks", str(walks)]) == EXIT_OK
        assert not walks.exists()

    def test_unknown_method(self):
        assert cli_main(["coarsen", "--poisson", "4", "4", "--method", "ruge-stuben"]) == EXIT_USAGE


class TestParser:

    def test_no_subcommand(self):
        assert cli_main([]) == EXIT_USAGE

    def test_defaults(self):
        args = build_parser().parse_args(["solve", "--poisson", "3", "5"])
        assert args.poisson == [3, 5]
        assert args.matrix is None
        assert args.rhs.value == "ones"
