import json

import pytest

from fdr_lab.cli import main


def test_lowerbound_json(capsys):
    assert main(["lowerbound", "--N", "1", "--mu", "1", "--algo", "fdr"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert 1 / 9 - 1e-12 <= rep["achieved"] <= 1 / 5 + 1e-12
    assert rep["span_ok"] and rep["chain_ok"]


def test_lowerbound_grid_csv(capsys):
    assert main(["lowerbound", "--N", "1", "3", "--mu", "0.1", "10", "--algo", "all", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "N,mu,method,achieved,floor,ceiling,span_ok,chain_ok"
    assert len(lines) == 1 + 2 * 2 * 6


def test_zero_iterations_is_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        main(["run", "--algo", "fdr", "--n-iters", "0"])
    assert e.value.code == 2
    assert "N >= 1 required" in capsys.readouterr().err


def test_unknown_flag_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["bench", "--frobnicate"])
    assert e.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_run_and_lyapunov(tmp_path):
    out = tmp_path / "r.json"
    assert main(["run", "--algo", "fdr", "--n-iters", "20", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["sq_dist"] <= rep["fdr_bound"]
    assert main(["lyapunov", "--n-iters", "10", "--out", str(tmp_path / "l.json")]) == 0
    assert json.loads((tmp_path / "l.json").read_text())["ok"]


def test_failed_invariant_exit_1(tmp_path, monkeypatch, capsys):
    import fdr_lab.cli as cli

    monkeypatch.setattr(cli, "check_case_equalities", lambda cert: {"ok": False})
    out = tmp_path / "l.json"
    assert main(["lyapunov", "--n-iters", "3", "--out", str(out)]) == 1
    assert str(out) in capsys.readouterr().err


def test_bench_and_plot(tmp_path):
    d = tmp_path / "runs"
    assert main(["bench", "--seeds", "2", "--k-grid", "1", "5", "--out", str(d)]) == 0
    assert (d / "bench.csv").exists() and (d / "bench.svg").exists() and (d / "bench.json").exists()
    assert main(["plot", str(d / "bench.csv"), "--out", str(tmp_path / "p.svg")]) == 0
    assert (tmp_path / "p.svg").read_text() == (d / "bench.svg").read_text()
