import json

import pytest

from src.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, run_cli
from src.config import Config


@pytest.fixture(autouse=True)
def _no_default_config(monkeypatch):
    monkeypatch.setattr(Config, "DEFAULT_CONFIG", "")


def test_exponent_verdict_on_stdout(capsys):
    assert run_cli(["exponents", "--d", "3", "--p", "4/3", "--q", "2"]) == EXIT_OK
    verdict = json.loads(capsys.readouterr().out)
    assert verdict["maximal_range"]["in_range"] is True
    assert [c["slack"] for c in verdict["maximal_range"]["binding_constraints"]] == ["0", "0"]
    assert verdict["conjugate_p"] == "4"


def test_exponent_checks_write_a_report(tmp_path, capsys):
    assert run_cli(["exponents", "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "exponents.json").exists()
    assert (tmp_path / "exponents.csv").exists()
    assert "exponents: passed" in capsys.readouterr().out


def test_lone_exponent_is_a_usage_error():
    assert run_cli(["exponents", "--p", "4/3"]) == EXIT_USAGE


def test_unknown_subcommand():
    assert run_cli(["fourier"]) == EXIT_USAGE


def test_bad_config_file(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("dimension: 3\nbogus: 1\n")
    assert run_cli(["knapp", "--config", str(path)]) == EXIT_USAGE
    assert "line 2" in capsys.readouterr().err


def test_experiment_error_fails_the_run(tmp_path, capsys):
    path = tmp_path / "short.cfg"
    path.write_text("knapp_deltas: [0.25, 0.125]\n")
    assert run_cli(["knapp", "--config", str(path), "--out", str(tmp_path / "out")]) == EXIT_FAILED
    assert "knapp" in capsys.readouterr().err


def test_infinite_exponent_gives_a_verdict(capsys):
    assert run_cli(["exponents", "--d", "3", "--p", "4/3", "--q", "inf"]) == EXIT_OK
    verdict = json.loads(capsys.readouterr().out)
    assert verdict["maximal_range"]["in_range"] is False
    assert "8/7" in verdict["young_chain"]["error"]
