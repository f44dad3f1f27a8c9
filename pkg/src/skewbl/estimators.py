"""scikit-learn style wrappers around the functional API."""

import numpy as np
from sklearn.base import BaseEstimator, DensityMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .bayes_bl import DEFAULT_GAMMA, DEFAULT_TAU, MarketPrior, ViewSet, bl_optimize, bl_posterior, bl_predictive, skbl_predictive
from .estimation import ReturnPanel, fit_snt_mle, sample_moments
from .frontier import run_bl_frontier, run_skbl_surface
from .simaan import optimize_mvs, simaan_from_snt
from .sntdist import snt_logpdf, snt_sample

__all__ = ["SkewNormalMLE", "BlackLittermanAllocator", "SkewBlackLittermanAllocator"]


def _panel(X):
    X = check_array(X, dtype=float, ensure_min_samples=2)
    return ReturnPanel(None, None, X)


class SkewNormalMLE(DensityMixin, BaseEstimator):
    """Maximum-likelihood SNT fit with ``lambda0 = 0`` and an LR test against the normal.

    Parameters
    ----------
    fix_sigma : bool
        Hold the scale matrix at the sample covariance.
    n_starts : int
        Number of optimizer starts.
    max_iter : int
        Iteration cap per start.
    random_state : int
        Seed for the start perturbations and for :meth:`sample`.
    """

    def __init__(self, fix_sigma=False, n_starts=5, max_iter=500, random_state=0):
        self.fix_sigma = fix_sigma
        self.n_starts = n_starts
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        panel = _panel(X)
        panel.check_estimable()
        fit = fit_snt_mle(panel, fix_sigma=self.fix_sigma, n_starts=self.n_starts, max_iter=self.max_iter, seed=self.random_state)
        self.fit_result_ = fit
        self.params_ = fit.params
        self.mu_ = fit.params.mu
        self.sigma_ = fit.params.sigma
        self.lambda1_ = fit.params.lambda1
        self.lr_stat_ = fit.lr_stat
        self.p_value_ = fit.p_value
        self.n_features_in_ = panel.k
        return self

    def score_samples(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=float)
        return snt_logpdf(self.params_, X)

    def score(self, X, y=None):
        """Mean log-likelihood per row."""
        return float(np.mean(self.score_samples(X)))

    def sample(self, n_samples=1):
        check_is_fitted(self)
        return snt_sample(self.params_, n_samples, seed=self.random_state)


class BlackLittermanAllocator(BaseEstimator):
    """Classical BL allocation. ``fit`` takes a T x k return matrix and sets the prior covariance."""

    def __init__(self, w_star=None, P=None, v=None, omega_v=None, gamma=DEFAULT_GAMMA, tau=DEFAULT_TAU, r_f=0.0):
        self.w_star = w_star
        self.P = P
        self.v = v
        self.omega_v = omega_v
        self.gamma = gamma
        self.tau = tau
        self.r_f = r_f

    def _setup(self, X):
        panel = _panel(X)
        _, sigma = sample_moments(panel)
        prior = MarketPrior(self.w_star, sigma, gamma=self.gamma, tau=self.tau)
        views = ViewSet(self.P, self.v, self.omega_v)
        self.prior_ = prior
        self.views_ = views
        self.pi_ = prior.pi
        self.n_features_in_ = panel.k
        return prior, views

    def fit(self, X, y=None):
        prior, views = self._setup(X)
        post = bl_posterior(prior, views)
        self.posterior_mean_ = post.mu_bl
        self.posterior_cov_ = post.sigma_bl
        _, self.predictive_cov_ = bl_predictive(prior, views)
        return self

    def predict(self, M):
        """Weights (one row per target mean)."""
        check_is_fitted(self)
        M = np.atleast_1d(np.asarray(M, dtype=float))
        return np.array([bl_optimize(self.posterior_mean_, self.predictive_cov_, m) for m in M])

    def frontier(self, M_grid):
        check_is_fitted(self)
        return run_bl_frontier(self.prior_, self.views_, M_grid, r_f=self.r_f)


class SkewBlackLittermanAllocator(BlackLittermanAllocator):
    """Skew-normal BL allocation on the (M, N) grid.

    With ``lambda1=None`` the skew vector is estimated in ``fit`` with the
    scale held at the sample covariance.
    """

    def __init__(
        self,
        w_star=None,
        P=None,
        v=None,
        omega_v=None,
        gamma=DEFAULT_GAMMA,
        tau=DEFAULT_TAU,
        r_f=0.0,
        lambda1=None,
        n_starts=5,
        random_state=0,
    ):
        super().__init__(w_star=w_star, P=P, v=v, omega_v=omega_v, gamma=gamma, tau=tau, r_f=r_f)
        self.lambda1 = lambda1
        self.n_starts = n_starts
        self.random_state = random_state

    def fit(self, X, y=None):
        prior, views = self._setup(X)
        if self.lambda1 is None:
            panel = _panel(X)
            panel.check_estimable()
            fit = fit_snt_mle(panel, fix_sigma=True, n_starts=self.n_starts, seed=self.random_state)
            self.lambda1_ = fit.params.lambda1.copy()
        else:
            self.lambda1_ = np.asarray(self.lambda1, dtype=float)
        pred = skbl_predictive(prior, views, self.lambda1_)
        self.predictive_ = pred
        self.simaan_ = simaan_from_snt(pred.params)
        return self

    def predict(self, targets):
        """Weights for each ``(M, N)`` row of ``targets``."""
        check_is_fitted(self)
        targets = np.atleast_2d(np.asarray(targets, dtype=float))
        loc = self.predictive_.location
        return np.array([optimize_mvs(self.simaan_, loc, M, N).w for M, N in targets])

    def frontier(self, M_grid, N_grid):
        check_is_fitted(self)
        return run_skbl_surface(self.prior_, self.views_, self.lambda1_, M_grid, N_grid, r_f=self.r_f)
