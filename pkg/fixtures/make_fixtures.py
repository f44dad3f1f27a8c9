"""Regenerate the bundled fixtures.

synthetic/  five assets, 120 monthly skew-normal returns, market weights, views
normal/     three assets, 2000 normal returns (the LR test should not reject)

Run from the repository root: ``python3 fixtures/make_fixtures.py``.
"""

from pathlib import Path

import numpy as np
import pandas as pd

from skewbl import SntParams, snt_sample

HERE = Path(__file__).resolve().parent


def write_prices(path, tickers, returns, start="2010-01-31", freq="ME"):
    dates = pd.date_range(start, periods=returns.shape[0] + 1, freq=freq)
    prices = 100.0 * np.exp(np.vstack([np.zeros(returns.shape[1]), np.cumsum(returns, axis=0)]))
    frame = pd.DataFrame(prices, columns=tickers)
    frame.insert(0, "date", dates.strftime("%Y-%m-%d"))
    frame.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")


def synthetic():
    out = HERE / "synthetic"
    out.mkdir(exist_ok=True)
    tickers = ["AAPL", "MSFT", "GOOGL", "KO", "XOM"]
    vols = np.array([0.08, 0.06, 0.07, 0.04, 0.06])
    corr = np.array(
        [
            [1.0, 0.55, 0.6, 0.2, 0.25],
            [0.55, 1.0, 0.6, 0.25, 0.2],
            [0.6, 0.6, 1.0, 0.2, 0.2],
            [0.2, 0.25, 0.2, 1.0, 0.3],
            [0.25, 0.2, 0.2, 0.3, 1.0],
        ]
    )
    sigma = corr * np.outer(vols, vols)
    mu = np.array([0.0, 0.0, -0.01, 0.01, 0.0])
    law = SntParams(0.0, [1.5, -0.5, 1.0, -1.0, 0.5], mu, sigma)
    returns = snt_sample(law, 120, seed=20240601)
    write_prices(out / "prices.csv", tickers, returns)
    weights = pd.DataFrame({"ticker": tickers, "weight": [0.3, 0.28, 0.22, 0.1, 0.1]})
    weights.to_csv(out / "weights.csv", index=False, lineterminator="\n")
    (out / "views.txt").write_text(
        "# coefficients | value | variance (monthly decimals)\n"
        "AAPL=1 | 0.015 | 0.0001\n"
        "GOOGL=1, MSFT=-1 | 0.025 | 0.0001\n"
        "KO=-1 | 0.005 | 0.0001\n"
    )


def normal():
    out = HERE / "normal"
    out.mkdir(exist_ok=True)
    rng = np.random.default_rng(7)
    sigma = 0.0004 * np.array([[1.0, 0.3, 0.1], [0.3, 1.0, 0.2], [0.1, 0.2, 1.0]])
    returns = rng.multivariate_normal(np.full(3, 0.0005), sigma, size=2000)
    write_prices(out / "prices.csv", ["AAA", "BBB", "CCC"], returns, start="2015-01-01", freq="D")


if __name__ == "__main__":
    synthetic()
    normal()
