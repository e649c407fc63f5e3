import json

import pytest

from gpcpd.bench.instances import fixture_path
from gpcpd.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, cli_main
from gpcpd.core import DenseTensor, cp_equivalent
from gpcpd.core.parser import read_factors, write_tensor


@pytest.fixture
def exact_file(tmp_path, exact_instance):
    path = tmp_path / "exact.json"
    write_tensor(path, exact_instance.F)
    return str(path)


@pytest.fixture
def noisy_file(tmp_path, noisy_instance):
    path = tmp_path / "noisy.json"
    write_tensor(path, noisy_instance.F)
    return str(path)


@pytest.fixture
def zero_file(tmp_path):
    path = tmp_path / "zero.json"
    write_tensor(path, DenseTensor.zeros((3, 3, 2)))
    return str(path)


def test_rank(exact_file, capsys):
    assert cli_main(["rank", exact_file]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "3"


def test_rank_of_slices_fixture(capsys):
    assert cli_main(["rank", str(fixture_path("slices_4x4x3"))]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "4"


def test_rank_json(exact_file, capsys):
    assert cli_main(["rank", exact_file, "--json"]) == EXIT_OK
    info = json.loads(capsys.readouterr().out)
    assert info["dims"] == [6, 5, 4]
    assert info["estimated_rank"] == 3
    assert info["flattening"]["shape"] == [6, 20]


def test_decompose_writes_factors(exact_file, exact_instance, tmp_path, capsys):
    factors_path = tmp_path / "factors.json"
    report_path = tmp_path / "report.json"
    code = cli_main(["decompose", exact_file, "--rank", "3", "-o", str(factors_path),
                     "--report", str(report_path), "--json"])
    assert code == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["method"] == "decompose"
    assert summary["rel_resid"] < 1e-8
    assert cp_equivalent(read_factors(factors_path), exact_instance.factors, 1e-6)
    with open(report_path, encoding="utf-8") as handle:
        assert json.load(handle)["rank"] == 3


def test_approximate_with_refinement(noisy_file, capsys):
    assert cli_main(["approximate", noisy_file, "-r", "3", "--refine", "--max-iter", "50"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "residual (gp):" in out
    assert "residual (opt):" in out


def test_gevd(exact_file, capsys):
    assert cli_main(["gevd", exact_file, "--rank", "3", "--json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["rel_resid"] < 1e-8


def test_missing_rank_is_a_usage_error(exact_file):
    assert cli_main(["decompose", exact_file]) == EXIT_USAGE


def test_rank_bound_is_an_input_error(exact_file, capsys):
    assert cli_main(["decompose", exact_file, "--rank", "7"]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "RankBoundError" in err


def test_invalid_option_value(noisy_file):
    assert cli_main(["approximate", noisy_file, "-r", "3", "--als-tol", "2"]) == EXIT_USAGE


def test_numerical_failure_exit_code(zero_file, capsys):
    assert cli_main(["gevd", zero_file, "--rank", "2"]) == EXIT_NUMERICAL
    assert "PencilError" in capsys.readouterr().err


def test_malformed_input_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{", encoding="utf-8")
    assert cli_main(["rank", str(path)]) == EXIT_USAGE


def test_bench(tmp_path, capsys):
    report_path = tmp_path / "bench.json"
    code = cli_main(["bench", "--dims", "5,4,3", "--rank", "2", "--eps", "0,1e-3", "--trials", "1",
                     "-o", str(report_path), "--json"])
    assert code == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert len(report["records"]) == 2
    assert report["config"]["eps"] == [0.0, 1e-3]
    with open(report_path, encoding="utf-8") as handle:
        assert json.load(handle)["format"] == "benchreport-v1"


def test_bench_config_file_with_overrides(tmp_path, capsys):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"dims": [5, 4, 3], "rank": 2, "trials": 3}), encoding="utf-8")
    assert cli_main(["bench", "--config", str(config_path), "--trials", "1", "--method", "gevd"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("1 records, 0 failures")
    assert "gevd" in out


@pytest.mark.parametrize("argv", [
    ["bench", "--rank", "2"],
    ["bench", "--dims", "a,b,c", "--rank", "2"],
    ["bench", "--dims", "5,4", "--rank", "2"],
])
def test_bench_usage_errors(argv):
    assert cli_main(argv) == EXIT_USAGE


def test_serve_starts_uvicorn(monkeypatch):
    from gpcpd.api import run

    calls = []
    monkeypatch.setattr(run.uvicorn, "run", lambda app, **kwargs: calls.append((app, kwargs)))
    assert cli_main(["serve", "--port", "8123"]) == EXIT_OK
    assert calls == [("gpcpd.api.main:app",
                      {"host": "127.0.0.1", "port": 8123, "reload": False, "log_level": "info"})]


def test_serve_rejects_bad_port():
    assert cli_main(["serve", "--port", "0"]) == EXIT_USAGE


def test_approximate_with_plain_als(noisy_file, capsys):
    argv = ["approximate", noisy_file, "-r", "3", "--refine", "--no-line-search", "--recovery", "diagonal",
            "--max-iter", "50"]
    assert cli_main(argv) == EXIT_OK
    assert "ALS sweeps" in capsys.readouterr().out


def test_unknown_recovery_is_a_usage_error(noisy_file):
    assert cli_main(["approximate", noisy_file, "-r", "3", "--recovery", "eigen"]) == EXIT_USAGE
