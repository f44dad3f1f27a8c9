"""Frontier pipelines: classical BL frontier, skew-normal BL (M, N) surface, comparisons."""

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .bayes_bl import bl_optimize, bl_predictive, skbl_portfolio_law, skbl_predictive
from .exceptions import DimensionError, NumericalError
from .simaan import frontier_sweep, simaan_from_snt

__all__ = [
    "FrontierRow",
    "FrontierReport",
    "Comparison",
    "run_bl_frontier",
    "run_skbl_surface",
    "compare_reports",
    "LONG_COLUMNS",
]

LONG_COLUMNS = ["model", "M", "N", "volatility", "tau1_w", "sharpe"]

_NAN = float("nan")


@dataclass(frozen=True, eq=False)
class FrontierRow:
    M: float
    N: float  # NaN for the classical model, which has no loading constraint
    weights: np.ndarray
    volatility: float
    variance: float
    tau1_w: float
    skewness: float
    sharpe: float
    spherical: float = _NAN
    non_spherical: float = _NAN
    status: str = "ok"

    @property
    def ok(self):
        return self.status == "ok"


@dataclass(frozen=True, eq=False)
class FrontierReport:
    rows: list
    model_tag: str
    tickers: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        rows = sorted(self.rows, key=lambda r: (r.M, -math.inf if math.isnan(r.N) else r.N))
        object.__setattr__(self, "rows", rows)

    @property
    def M_values(self):
        return sorted({r.M for r in self.rows})

    def to_frame(self):
        """One row per grid point with every reported quantity and the weights."""
        records = []
        for r in self.rows:
            rec = {
                "model": self.model_tag,
                "M": r.M,
                "N": r.N,
                "volatility": r.volatility,
                "variance": r.variance,
                "tau1_w": r.tau1_w,
                "skewness": r.skewness,
                "sharpe": r.sharpe,
                "spherical": r.spherical,
                "non_spherical": r.non_spherical,
                "status": r.status,
            }
            for t, w in zip(self.tickers, r.weights):
                rec[f"w_{t}"] = w
            records.append(rec)
        return pd.DataFrame.from_records(records)

    def long_table(self):
        """Plot-ready table with columns model, M, N, volatility, tau1_w, sharpe."""
        return self.to_frame()[LONG_COLUMNS]

    @classmethod
    def from_frame(cls, frame, metadata=None):
        tags = frame["model"].unique()
        if len(tags) != 1:
            raise DimensionError(f"expected one model tag, found {list(tags)}")
        tickers = [c[2:] for c in frame.columns if c.startswith("w_")]
        rows = []
        for rec in frame.to_dict("records"):
            rows.append(
                FrontierRow(
                    M=float(rec["M"]),
                    N=float(rec["N"]),
                    weights=np.array([rec[f"w_{t}"] for t in tickers], dtype=float),
                    volatility=float(rec["volatility"]),
                    variance=float(rec["variance"]),
                    tau1_w=float(rec["tau1_w"]),
                    skewness=float(rec["skewness"]),
                    sharpe=float(rec["sharpe"]),
                    spherical=float(rec["spherical"]),
                    non_spherical=float(rec["non_spherical"]),
                    status=str(rec["status"]),
                )
            )
        return cls(rows=rows, model_tag=str(tags[0]), tickers=tickers, metadata=dict(metadata or {}))


def _failed_row(k, M, N, message):
    return FrontierRow(M, N, np.full(k, _NAN), _NAN, _NAN, _NAN, _NAN, _NAN, status=message)


def _metadata(prior, r_f, M_grid, N_grid, extra):
    meta = {
        "gamma": prior.gamma,
        "tau": prior.tau,
        "r_f": float(r_f),
        "M_grid": [float(m) for m in M_grid],
    }
    if N_grid is not None:
        meta["N_grid"] = [float(n) for n in N_grid]
    meta.update(extra or {})
    return meta


def run_bl_frontier(prior, views, M_grid, r_f=0.0, tickers=None, metadata=None):
    """Classical BL frontier: one minimum-variance portfolio per target mean."""
    if len(M_grid) == 0:
        raise DimensionError("M_grid must be non-empty")
    mean, cov = bl_predictive(prior, views)
    tickers = list(tickers) if tickers is not None else [f"A{j}" for j in range(prior.k)]
    rows = []
    for M in M_grid:
        M = float(M)
        try:
            w = bl_optimize(mean, cov, M)
        except NumericalError as exc:
            rows.append(_failed_row(prior.k, M, _NAN, f"{type(exc).__name__}: {exc}"))
            continue
        variance = float(w @ cov @ w)
        vol = math.sqrt(variance)
        rows.append(
            FrontierRow(
                M=M,
                N=_NAN,
                weights=w,
                volatility=vol,
                variance=variance,
                tau1_w=0.0,
                skewness=0.0,
                sharpe=(M - r_f) / vol,
                spherical=variance,
                non_spherical=0.0,
            )
        )
    meta = _metadata(prior, r_f, M_grid, None, metadata)
    return FrontierReport(rows=rows, model_tag="BL", tickers=tickers, metadata=meta)


def run_skbl_surface(prior, views, lambda1, M_grid, N_grid, r_f=0.0, tickers=None, metadata=None):
    """Skew-normal BL surface over the (M, N) grid, M outer and N inner.

    Each point minimizes the spherical variance under the predictive law's
    Simaan decomposition. Volatility is ``sqrt(w' sigma_skbl w - (2/pi) N^2)``.
    """
    pred = skbl_predictive(prior, views, lambda1, 0.0)
    rep = simaan_from_snt(pred.params)
    solutions = frontier_sweep(rep, pred.location, M_grid, N_grid)
    tickers = list(tickers) if tickers is not None else [f"A{j}" for j in range(prior.k)]
    rows = []
    for sol in solutions:
        if not sol.ok:
            rows.append(_failed_row(prior.k, sol.M, sol.N, sol.status))
            continue
        w = sol.w
        variance = float(w @ pred.scale @ w) - (2.0 / np.pi) * sol.N**2
        vol = math.sqrt(variance)
        law = skbl_portfolio_law(pred, w)
        rows.append(
            FrontierRow(
                M=sol.M,
                N=sol.N,
                weights=w,
                volatility=vol,
                variance=variance,
                tau1_w=law.tau1,
                skewness=law.skewness(),
                sharpe=(sol.M - r_f) / vol,
                spherical=sol.spherical,
                non_spherical=sol.non_spherical,
            )
        )
    extra = {"lambda1": [float(x) for x in np.asarray(lambda1, dtype=float)]}
    extra.update(metadata or {})
    meta = _metadata(prior, r_f, M_grid, N_grid, extra)
    return FrontierReport(rows=rows, model_tag="skBL", tickers=tickers, metadata=meta)


@dataclass(frozen=True, eq=False)
class Comparison:
    """Pairwise comparison of two reports at each shared target mean.

    ``table`` has one row per (M, row of a, row of b) with differences taken
    as ``b - a``, so swapping the reports negates every difference.
    """

    table: pd.DataFrame
    model_a: str
    model_b: str

    def wide(self, value="volatility"):
        """One row per M, one column per (model, N)."""
        cols = {}
        for side, model in (("a", self.model_a), ("b", self.model_b)):
            sub = self.table[["M", f"N_{side}", f"{value}_{side}"]].drop_duplicates()
            for n, grp in sub.groupby(f"N_{side}", dropna=False, sort=True):
                label = model if (isinstance(n, float) and math.isnan(n)) else f"{model}[N={n:.12g}]"
                cols[label] = grp.set_index("M")[f"{value}_{side}"]
        return pd.DataFrame(cols).sort_index()


def compare_reports(a, b):
    """Join two reports on M. Their M grids must coincide."""
    Ma, Mb = a.M_values, b.M_values
    if len(Ma) != len(Mb) or not np.allclose(Ma, Mb, rtol=0, atol=1e-15):
        raise DimensionError(f"reports have different M grids: {Ma} vs {Mb}")
    records = []
    for M in Ma:
        rows_a = [r for r in a.rows if r.M == M]
        rows_b = [r for r in b.rows if r.M == M]
        for ra in rows_a:
            for rb in rows_b:
                records.append(
                    {
                        "M": M,
                        "model_a": a.model_tag,
                        "N_a": ra.N,
                        "model_b": b.model_tag,
                        "N_b": rb.N,
                        "volatility_a": ra.volatility,
                        "volatility_b": rb.volatility,
                        "volatility_diff": rb.volatility - ra.volatility,
                        "sharpe_a": ra.sharpe,
                        "sharpe_b": rb.sharpe,
                        "sharpe_diff": rb.sharpe - ra.sharpe,
                    }
                )
    return Comparison(table=pd.DataFrame.from_records(records), model_a=a.model_tag, model_b=b.model_tag)
