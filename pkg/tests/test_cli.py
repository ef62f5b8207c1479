import csv

import pytest
from click.testing import CliRunner

from alphavol.cli import main


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def square_csv(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("x,y\n0,0\n1,0\n1,1\n0,1\n")
    return path


def test_hull_area(runner, square_csv):
    res = runner.invoke(main, ["hull", "area", str(square_csv), "--alpha", "1000", "--tol", "1e-4"])
    assert res.exit_code == 0, res.output
    fields = dict(kv.split("=") for kv in res.output.split())
    assert float(fields["lower"]) <= 0.99967 <= float(fields["upper"])


def test_hull_contains(runner, tmp_path):
    path = tmp_path / "two.csv"
    path.write_text("x,y\n0,0\n1,0\n")
    res = runner.invoke(main, ["hull", "contains", str(path), "--alpha", "1", "--x", "0.5", "--y", "0"])
    assert res.exit_code == 0 and res.output.startswith("false")
    res = runner.invoke(main, ["hull", "contains", str(path), "--alpha", "1", "--x", "0", "--y", "0"])
    assert res.output.startswith("true")


def test_hull_svg(runner, square_csv, tmp_path):
    out = tmp_path / "h.svg"
    res = runner.invoke(main, ["hull", "svg", str(square_csv), "--alpha", "0.8", "-o", str(out)])
    assert res.exit_code == 0 and out.read_text().startswith("<svg")


def test_bad_points_file(runner, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    res = runner.invoke(main, ["hull", "area", str(path), "--alpha", "1"])
    assert res.exit_code != 0
    res = runner.invoke(main, ["hull", "area", str(tmp_path / "nope.csv"), "--alpha", "1"])
    assert res.exit_code != 0


def test_bad_alpha(runner, square_csv):
    res = runner.invoke(main, ["hull", "area", str(square_csv), "--alpha", "-1"])
    assert res.exit_code != 0 and "alpha" in res.output


@pytest.mark.parametrize("method", ["split", "plugin", "bagged"])
def test_estimate(runner, method):
    args = ["estimate", method, "--domain", "annulus(0.25,1)", "--n", "200", "--alpha", "0.25",
            "--seed", "4", "--tol", "1e-2", "--b", "2"]
    res = runner.invoke(main, args)
    assert res.exit_code == 0, res.output
    assert "estimate=" in res.output and "true_area=2.94" in res.output
    assert runner.invoke(main, args).output == res.output


def test_estimate_bad_m(runner):
    res = runner.invoke(main, ["estimate", "split", "--domain", "annulus(0.25,1)", "--n", "20", "--m", "20",
                               "--alpha", "0.25"])
    assert res.exit_code != 0


def test_experiment_and_rate_check(runner, tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(f"alpha_list = 0.25\nn_list = 60, 120, 240\nm_rule = 5\nB = 2\ntolerance = 1e-2\n"
                   f"output_dir = {tmp_path / 'out'}\n")
    res = runner.invoke(main, ["experiment", "error-curve", "--config", str(cfg), "--threads", "2"])
    assert res.exit_code == 0, res.output
    summary = tmp_path / "out" / "error_curve.csv"
    assert len(list(csv.DictReader(open(summary)))) == 3
    res = runner.invoke(main, ["rate-check", "--csv", str(summary)])
    assert res.exit_code == 0 and "slope=" in res.output


def test_experiment_bad_config(runner, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense = 3\n")
    res = runner.invoke(main, ["experiment", "coverage", "--config", str(cfg)])
    assert res.exit_code != 0 and "unknown key" in res.output


def test_plot_command(runner, tmp_path):
    src = tmp_path / "c.csv"
    src.write_text("n,j,mean_rel_error,sd_rel_error\n100,5,0.1,0.01\n200,5,0.05,0.01\n")
    out = tmp_path / "c.svg"
    res = runner.invoke(main, ["plot", str(src), "-o", str(out)])
    assert res.exit_code == 0 and out.exists()
