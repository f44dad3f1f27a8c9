"""Black-Litterman portfolio allocation with hidden-truncation skew-normal returns."""

from .bayes_bl import (
    BlPosterior,
    MarketPrior,
    SkblPredictive,
    ViewSet,
    bl_optimize,
    bl_posterior,
    bl_predictive,
    implied_returns,
    skbl_portfolio_law,
    skbl_predictive,
)
from .estimation import FitResult, ReturnPanel, fit_snt_mle, log_returns, lr_test, normal_loglik, sample_moments, snt_loglik
from .exceptions import (
    DataError,
    DecompositionError,
    DegenerateConstraintsError,
    DimensionError,
    NumericalError,
    ParameterError,
    SingularSkewError,
    SkewBLError,
    UnsupportedParameterError,
)
from .frontier import Comparison, FrontierReport, FrontierRow, compare_reports, run_bl_frontier, run_skbl_surface
from .simaan import PortfolioSolution, SimaanRep, basis_portfolios, frontier_sweep, optimize_mvs, portfolio_variance, simaan_from_snt
from .sntdist import (
    SntParams,
    UnivariateSnt,
    expected_normal_cdf,
    snt_affine,
    snt_cov,
    snt_density,
    snt_log_mgf,
    snt_logpdf,
    snt_mean,
    snt_mgf,
    snt_portfolio_marginal,
    snt_sample,
)

__version__ = "0.1.0"
