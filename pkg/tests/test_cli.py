import json
import subprocess
import sys

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from skewbl.cli import main


def run(*argv):
    return main([str(a) for a in argv])


def data_args(d):
    return ["--prices", d / "prices.csv", "--weights", d / "weights.csv", "--views", d / "views.txt"]


def test_frontier_both(synthetic_dir, tmp_path):
    assert run("frontier", *data_args(synthetic_dir), "--output-dir", tmp_path) == 0
    for name in ("bl_frontier.csv", "skbl_surface.csv", "comparison.csv", "comparison_wide.csv", "frontier_points.csv", "metadata.json"):
        assert (tmp_path / name).exists()
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert meta["tau"] == 0.025 and meta["gamma"] == 2.5
    assert meta["models"] == ["BL", "skBL"]
    bl = pd.read_csv(tmp_path / "bl_frontier.csv")
    sk = pd.read_csv(tmp_path / "skbl_surface.csv")
    assert len(bl) == 4 and len(sk) == 24
    wcols = [c for c in sk.columns if c.startswith("w_")]
    assert wcols == ["w_AAPL", "w_MSFT", "w_GOOGL", "w_KO", "w_XOM"]
    assert np.abs(sk[wcols].sum(axis=1) - 1).max() < 1e-10
    points = pd.read_csv(tmp_path / "frontier_points.csv")
    assert list(points.columns) == ["model", "M", "N", "volatility", "tau1_w", "sharpe"]


def test_outputs_byte_identical(synthetic_dir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("frontier", *data_args(synthetic_dir), "--output-dir", a, "--seed", 3) == 0
    assert run("frontier", *data_args(synthetic_dir), "--output-dir", b, "--seed", 3) == 0
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_estimate_normal_fixture(normal_dir, tmp_path):
    assert run("estimate", "--prices", normal_dir / "prices.csv", "--output-dir", tmp_path) == 0
    result = pd.read_csv(tmp_path / "fit_result.csv")
    assert result["p_value"].iloc[0] > 0.01
    params = pd.read_csv(tmp_path / "fit_params.csv")
    assert params["ticker"].tolist() == ["AAA", "BBB", "CCC"]


def test_skbl_from_fit_file(synthetic_dir, tmp_path):
    assert run("estimate", "--prices", synthetic_dir / "prices.csv", "--fix-sigma", "--output-dir", tmp_path / "fit") == 0
    args = data_args(synthetic_dir)
    assert run("frontier", *args, "--model", "skbl", "--fit", tmp_path / "fit" / "fit_params.csv", "--output-dir", tmp_path / "a") == 0
    assert run("frontier", *args, "--model", "skbl", "--output-dir", tmp_path / "b") == 0
    a = pd.read_csv(tmp_path / "a" / "skbl_surface.csv")
    b = pd.read_csv(tmp_path / "b" / "skbl_surface.csv")
    assert_allclose(a["volatility"], b["volatility"], rtol=1e-9)


def test_implied_and_posterior(synthetic_dir, tmp_path):
    assert run("implied", "--prices", synthetic_dir / "prices.csv", "--weights", synthetic_dir / "weights.csv", "--output-dir", tmp_path) == 0
    implied = pd.read_csv(tmp_path / "implied_returns.csv")
    sigma = pd.read_csv(tmp_path / "sigma.csv").set_index("ticker")
    assert_allclose(implied["pi"], 2.5 * sigma.to_numpy() @ implied["w_star"].to_numpy(), rtol=1e-10)
    assert run("posterior", *data_args(synthetic_dir), "--output-dir", tmp_path) == 0
    post = pd.read_csv(tmp_path / "posterior.csv")
    assert list(post.columns) == ["ticker", "pi", "mu_bl"]
    assert (tmp_path / "sigma_bl.csv").exists()


def test_optimize(synthetic_dir, tmp_path):
    assert run("optimize", *data_args(synthetic_dir), "--model", "bl", "--M-grid", "0.01", "--output-dir", tmp_path) == 0
    weights = pd.read_csv(tmp_path / "bl_weights.csv")
    assert weights["weight"].sum() == pytest.approx(1.0, abs=1e-10)


def test_compare(synthetic_dir, tmp_path):
    assert run("frontier", *data_args(synthetic_dir), "--output-dir", tmp_path) == 0
    out = tmp_path / "cmp"
    assert run("compare", tmp_path / "skbl_surface.csv", tmp_path / "bl_frontier.csv", "--output-dir", out) == 0
    swapped = pd.read_csv(out / "comparison.csv")
    original = pd.read_csv(tmp_path / "comparison.csv")
    assert_allclose(np.sort(swapped["volatility_diff"]), np.sort(-original["volatility_diff"]), rtol=1e-11)


def test_missing_prices_is_usage_error(synthetic_dir, tmp_path, capsys):
    code = run("frontier", "--weights", synthetic_dir / "weights.csv", "--views", synthetic_dir / "views.txt")
    assert code == 1
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["exit_code"] == 1
    assert "--prices" in record["message"]


def test_bad_views_is_data_error(synthetic_dir, tmp_path, capsys):
    views = tmp_path / "views.txt"
    views.write_text("ZZZ=1 | 0.01 | 0.0001\n")
    code = run("posterior", "--prices", synthetic_dir / "prices.csv", "--weights", synthetic_dir / "weights.csv", "--views", views, "--output-dir", tmp_path)
    assert code == 1
    assert json.loads(capsys.readouterr().err)["error"] == "DataError"


def test_numerical_error_exit_code(synthetic_dir, tmp_path, capsys):
    code = run("implied", "--prices", synthetic_dir / "prices.csv", "--weights", synthetic_dir / "weights.csv", "--tau", "0", "--output-dir", tmp_path)
    assert code == 2
    assert json.loads(capsys.readouterr().err)["exit_code"] == 2


def test_bad_grid(synthetic_dir, tmp_path):
    assert run("frontier", *data_args(synthetic_dir), "--M-grid", "a,b", "--output-dir", tmp_path) == 1


def test_console_module(synthetic_dir, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "skewbl", "implied", "--prices", str(synthetic_dir / "prices.csv"), "--weights", str(synthetic_dir / "weights.csv"), "--output-dir", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
