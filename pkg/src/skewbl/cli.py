"""Batch command line: ``skewbl <command> [options]``.

Exit codes: 0 success, 1 data or usage error, 2 numerical failure. Errors are
also written to stderr as a one-line JSON record.
"""

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from . import io
from .bayes_bl import DEFAULT_GAMMA, DEFAULT_TAU, MarketPrior, bl_posterior, bl_predictive
from .estimation import fit_snt_mle, log_returns, sample_moments
from .exceptions import DataError, SkewBLError
from .frontier import FrontierReport, compare_reports, run_bl_frontier, run_skbl_surface

__all__ = ["RunConfig", "build_parser", "main"]

DEFAULT_M_GRID = "0.0042,0.0083,0.0125,0.0167"
DEFAULT_N_GRID = "0,0.01,0.02,0.03,0.04,0.05"

EXIT_OK, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2


class UsageError(DataError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _grid(text):
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid grid {text!r}") from None
    if not values or not np.all(np.isfinite(values)):
        raise argparse.ArgumentTypeError(f"grid must be a non-empty list of finite numbers: {text!r}")
    return values


@dataclass(frozen=True)
class RunConfig:
    prices_path: str
    weights_path: str = None
    views_path: str = None
    gamma: float = DEFAULT_GAMMA
    tau: float = DEFAULT_TAU
    r_f: float = 0.0
    M_grid: tuple = ()
    N_grid: tuple = ()
    model: str = "both"
    seed: int = 0
    output_dir: str = "."
    excess: bool = False
    fix_sigma: bool = False
    fit_path: str = None
    n_starts: int = 5

    @classmethod
    def from_args(cls, args):
        return cls(
            prices_path=args.prices,
            weights_path=getattr(args, "weights", None),
            views_path=getattr(args, "views", None),
            gamma=args.gamma,
            tau=args.tau,
            r_f=args.rf,
            M_grid=tuple(getattr(args, "M_grid", ())),
            N_grid=tuple(getattr(args, "N_grid", ())),
            model=getattr(args, "model", "both"),
            seed=args.seed,
            output_dir=args.output_dir,
            excess=args.excess,
            fix_sigma=getattr(args, "fix_sigma", False),
            fit_path=getattr(args, "fit", None),
            n_starts=getattr(args, "n_starts", 5),
        )


def build_parser():
    parser = _Parser(prog="skewbl", description="Black-Litterman allocation under normal and skew-normal returns.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, weights=True, views=False):
        p.add_argument("--prices", required=True, help="CSV with header date,TICKER1,...")
        p.add_argument("--weights", required=weights, help="CSV with header ticker,weight")
        if views:
            p.add_argument("--views", required=True, help="view records, one per line")
        p.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
        p.add_argument("--tau", type=float, default=DEFAULT_TAU)
        p.add_argument("--rf", type=float, default=0.0, help="per-period risk-free rate")
        p.add_argument("--excess", action="store_true", help="subtract --rf from log-returns")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output-dir", default=".")

    def grids(p, models):
        p.add_argument("--M-grid", dest="M_grid", type=_grid, default=_grid(DEFAULT_M_GRID))
        p.add_argument("--N-grid", dest="N_grid", type=_grid, default=_grid(DEFAULT_N_GRID))
        p.add_argument("--model", choices=models, default=models[-1])
        p.add_argument("--fit", help="fit_params.csv from 'estimate' supplying lambda1")
        p.add_argument("--n-starts", type=int, default=5)

    p = sub.add_parser("estimate", help="fit the skew-normal law and test it against the normal")
    common(p, weights=False)
    p.add_argument("--fix-sigma", action="store_true", help="hold the scale at the sample covariance")
    p.add_argument("--n-starts", type=int, default=5)

    p = sub.add_parser("implied", help="equilibrium returns from market weights")
    common(p)

    p = sub.add_parser("posterior", help="BL posterior of expected returns")
    common(p, views=True)

    p = sub.add_parser("optimize", help="optimal weights on the target grid")
    common(p, views=True)
    grids(p, ["bl", "skbl"])

    p = sub.add_parser("frontier", help="BL frontier, skBL surface, and their comparison")
    common(p, views=True)
    grids(p, ["bl", "skbl", "both"])

    p = sub.add_parser("compare", help="compare two frontier report CSVs")
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.add_argument("--output-dir", default=".")
    return parser


# --- pipeline pieces -------------------------------------------------------


def _panel(cfg):
    table = io.load_prices(cfg.prices_path)
    w_star = None
    if cfg.weights_path is not None:
        tickers, w_star = io.load_weights(cfg.weights_path)
        table = io.reconcile(table, tickers)
    panel = log_returns(table.prices, table.tickers, table.dates)
    if cfg.excess:
        panel = type(panel)(panel.tickers, panel.dates, panel.returns - cfg.r_f)
    return panel, w_star


def _prior(cfg, panel, w_star):
    _, sigma = sample_moments(panel)
    return MarketPrior(w_star, sigma, gamma=cfg.gamma, tau=cfg.tau)


def _lambda1(cfg, panel):
    if cfg.fit_path is not None:
        frame = io.read_csv(cfg.fit_path)
        if not {"ticker", "lambda1"} <= set(frame.columns):
            raise DataError(f"{cfg.fit_path}: needs 'ticker' and 'lambda1' columns")
        lookup = dict(zip(frame["ticker"].astype(str), frame["lambda1"]))
        missing = [t for t in panel.tickers if t not in lookup]
        if missing:
            raise DataError(f"{cfg.fit_path}: no lambda1 for {', '.join(missing)}")
        return np.array([lookup[t] for t in panel.tickers], dtype=float), "file"
    panel.check_estimable()
    # the skew law shares its scale with the prior, so fit with sigma held there
    fit = fit_snt_mle(panel, fix_sigma=True, n_starts=cfg.n_starts, seed=cfg.seed)
    return fit.params.lambda1.copy(), "mle_fixed_sigma"


def _metadata(cfg, panel):
    return {
        "dataset_hash": io.dataset_hash(cfg.prices_path, cfg.weights_path, cfg.views_path),
        "tickers": list(panel.tickers),
        "n_returns": panel.T,
        "excess": cfg.excess,
        "seed": cfg.seed,
    }


def _matrix_frame(tickers, matrix):
    frame = pd.DataFrame(matrix, columns=list(tickers))
    frame.insert(0, "ticker", list(tickers))
    return frame


def _out(cfg, name):
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def fit_frames(fit, tickers):
    """``(summary, params)`` frames written by ``estimate``."""
    summary = pd.DataFrame(
        [
            {
                "loglik_snt": fit.loglik_snt,
                "loglik_normal": fit.loglik_normal,
                "lr_stat": fit.lr_stat,
                "df": fit.params.k,
                "p_value": fit.p_value,
                "converged": fit.converged,
                "iterations": fit.iterations,
                "fix_sigma": fit.fix_sigma,
            }
        ]
    )
    params = pd.DataFrame(
        {
            "ticker": list(tickers),
            "mu": fit.params.mu,
            "lambda1": fit.params.lambda1,
            "tau1_marginal": fit.marginal_tau1(),
        }
    )
    for j, t in enumerate(tickers):
        params[f"sigma_{t}"] = fit.params.sigma[:, j]
    return summary, params


def cmd_estimate(cfg):
    panel, _ = _panel(cfg)
    fit = fit_snt_mle(panel, fix_sigma=cfg.fix_sigma, n_starts=cfg.n_starts, seed=cfg.seed)
    summary, params = fit_frames(fit, panel.tickers)
    io.write_csv(summary, _out(cfg, "fit_result.csv"))
    io.write_csv(params, _out(cfg, "fit_params.csv"))
    return fit


def cmd_implied(cfg):
    panel, w_star = _panel(cfg)
    prior = _prior(cfg, panel, w_star)
    frame = pd.DataFrame({"ticker": panel.tickers, "w_star": prior.w_star, "pi": prior.pi})
    io.write_csv(frame, _out(cfg, "implied_returns.csv"))
    io.write_csv(_matrix_frame(panel.tickers, prior.sigma), _out(cfg, "sigma.csv"))
    io.write_json({"gamma": prior.gamma, "tau": prior.tau, **_metadata(cfg, panel)}, _out(cfg, "metadata.json"))


def cmd_posterior(cfg):
    panel, w_star = _panel(cfg)
    prior = _prior(cfg, panel, w_star)
    views = io.load_views(cfg.views_path, panel.tickers)
    post = bl_posterior(prior, views)
    _, pred_cov = bl_predictive(prior, views)
    frame = pd.DataFrame({"ticker": panel.tickers, "pi": prior.pi, "mu_bl": post.mu_bl})
    io.write_csv(frame, _out(cfg, "posterior.csv"))
    io.write_csv(_matrix_frame(panel.tickers, post.sigma_bl), _out(cfg, "sigma_bl.csv"))
    io.write_csv(_matrix_frame(panel.tickers, pred_cov), _out(cfg, "predictive_cov.csv"))
    io.write_json({"gamma": prior.gamma, "tau": prior.tau, **_metadata(cfg, panel)}, _out(cfg, "metadata.json"))


def _reports(cfg, models):
    panel, w_star = _panel(cfg)
    prior = _prior(cfg, panel, w_star)
    views = io.load_views(cfg.views_path, panel.tickers)
    meta = _metadata(cfg, panel)
    reports = {}
    if "bl" in models:
        reports["bl"] = run_bl_frontier(prior, views, cfg.M_grid, r_f=cfg.r_f, tickers=panel.tickers, metadata=meta)
    if "skbl" in models:
        lambda1, source = _lambda1(cfg, panel)
        reports["skbl"] = run_skbl_surface(
            prior,
            views,
            lambda1,
            cfg.M_grid,
            cfg.N_grid,
            r_f=cfg.r_f,
            tickers=panel.tickers,
            metadata={**meta, "lambda1_source": source},
        )
    return reports


def cmd_optimize(cfg):
    (report,) = _reports(cfg, [cfg.model]).values()
    records = []
    for row in report.rows:
        for t, w in zip(report.tickers, row.weights):
            records.append({"model": report.model_tag, "M": row.M, "N": row.N, "ticker": t, "weight": w, "status": row.status})
    io.write_csv(pd.DataFrame.from_records(records), _out(cfg, f"{cfg.model}_weights.csv"))
    io.write_json(report.metadata, _out(cfg, "metadata.json"))


def cmd_frontier(cfg):
    models = ["bl", "skbl"] if cfg.model == "both" else [cfg.model]
    reports = _reports(cfg, models)
    names = {"bl": "bl_frontier.csv", "skbl": "skbl_surface.csv"}
    for key, report in reports.items():
        io.write_csv(report.to_frame(), _out(cfg, names[key]))
    points = pd.concat([r.long_table() for r in reports.values()], ignore_index=True)
    io.write_csv(points, _out(cfg, "frontier_points.csv"))
    if len(reports) == 2:
        comparison = compare_reports(reports["bl"], reports["skbl"])
        io.write_csv(comparison.table, _out(cfg, "comparison.csv"))
        io.write_csv(comparison.wide().reset_index(), _out(cfg, "comparison_wide.csv"))
    meta = {}
    for key, report in reports.items():
        meta.update(report.metadata)
    meta["models"] = [reports[k].model_tag for k in reports]
    io.write_json(meta, _out(cfg, "metadata.json"))
    return reports


def cmd_compare(args):
    a = FrontierReport.from_frame(io.read_csv(args.report_a))
    b = FrontierReport.from_frame(io.read_csv(args.report_b))
    comparison = compare_reports(a, b)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_csv(comparison.table, out / "comparison.csv")
    io.write_csv(comparison.wide().reset_index(), out / "comparison_wide.csv")


_COMMANDS = {
    "estimate": cmd_estimate,
    "implied": cmd_implied,
    "posterior": cmd_posterior,
    "optimize": cmd_optimize,
    "frontier": cmd_frontier,
}


def _report_error(exc, code):
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.command == "compare":
            cmd_compare(args)
        else:
            _COMMANDS[args.command](RunConfig.from_args(args))
    except (DataError, OSError) as exc:
        return _report_error(exc, EXIT_DATA)
    except (SkewBLError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _report_error(exc, EXIT_NUMERIC)
    return EXIT_OK


def entry_point():
    sys.exit(main())
