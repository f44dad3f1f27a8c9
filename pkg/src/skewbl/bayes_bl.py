"""Black-Litterman prior, views, posterior, and predictive laws.

The classical model puts ``M ~ N(pi, tau sigma)`` on expected returns and
observes views ``V | M = m ~ N(P m, Omega_v)``. Returns given ``M = m`` are
either ``N(m, sigma)`` or the recentred skew-normal
``SNT(lambda0, lambda1, m - s, sigma)``, where ``s`` is the SNT mean shift so
that ``E[R | M = m] = m``. Integrating ``m`` out against the posterior gives a
normal or an SNT predictive law respectively.
"""

from dataclasses import dataclass

import numpy as np

from ._linalg import as_matrix, as_vector, check_spd, spd_inv, sym_sqrt, sym_sqrt_pair
from .exceptions import DataError, DimensionError, ParameterError, UnsupportedParameterError
from .simaan import lagrange_portfolio
from .sntdist import SntParams, snt_portfolio_marginal

__all__ = [
    "DEFAULT_TAU",
    "DEFAULT_GAMMA",
    "MarketPrior",
    "ViewSet",
    "BlPosterior",
    "SkblPredictive",
    "implied_returns",
    "bl_posterior",
    "bl_predictive",
    "bl_optimize",
    "skbl_predictive",
    "skbl_portfolio_law",
]

DEFAULT_TAU = 0.025
DEFAULT_GAMMA = 2.5

#: Finite stand-ins for view variances of 0 and infinity.
DOGMATIC_VARIANCE = 1e-12
UNINFORMATIVE_VARIANCE = 1e12


def implied_returns(w_star, gamma, sigma):
    """Reverse-optimized equilibrium excess returns ``gamma * sigma @ w_star``."""
    w_star = as_vector(w_star, "w_star")
    sigma = as_matrix(sigma, "sigma", shape=(w_star.size, w_star.size))
    return float(gamma) * (sigma @ w_star)


@dataclass(frozen=True, eq=False)
class MarketPrior:
    """Equilibrium inputs. ``pi`` is derived on access, never stored."""

    w_star: np.ndarray
    sigma: np.ndarray
    gamma: float = DEFAULT_GAMMA
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        w_star = as_vector(self.w_star, "w_star")
        k = w_star.size
        sigma = as_matrix(self.sigma, "sigma")
        if sigma.shape != (k, k):
            raise DimensionError(f"sigma must be {k}x{k}, got {sigma.shape}")
        sigma, _, _ = check_spd(sigma)
        if np.any(w_star < 0):
            raise DataError("market weights must be non-negative")
        if abs(w_star.sum() - 1.0) > 1e-8:
            raise DataError(f"market weights must sum to 1, got {w_star.sum():.12g}")
        if not self.gamma > 0:
            raise ParameterError("gamma must be positive")
        if not self.tau > 0:
            raise ParameterError("tau must be positive")
        object.__setattr__(self, "w_star", w_star)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def k(self):
        return self.w_star.size

    @property
    def pi(self):
        return implied_returns(self.w_star, self.gamma, self.sigma)


@dataclass(frozen=True, eq=False)
class ViewSet:
    """``d`` views on ``k`` assets: pick matrix ``P``, values ``v``, diagonal ``omega_v``."""

    P: np.ndarray
    v: np.ndarray
    omega_v: np.ndarray

    def __post_init__(self):
        P = as_matrix(self.P, "P")
        d, k = P.shape
        v = as_vector(self.v, "v", size=d)
        omega = np.asarray(self.omega_v, dtype=float)
        if omega.ndim == 1:
            omega = np.diag(omega)
        omega = as_matrix(omega, "omega_v", shape=(d, d))
        if d > k:
            raise DimensionError(f"{d} views on {k} assets; need d <= k")
        if np.any(omega - np.diag(np.diag(omega))):
            raise DataError("omega_v must be diagonal")
        if np.any(np.diag(omega) <= 0):
            raise DataError("view variances must be positive")
        if np.linalg.matrix_rank(P) < d:
            raise DimensionError("pick matrix P must have full row rank")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "omega_v", omega)

    @property
    def d(self):
        return self.P.shape[0]

    @property
    def k(self):
        return self.P.shape[1]


@dataclass(frozen=True, eq=False)
class BlPosterior:
    mu_bl: np.ndarray
    sigma_bl: np.ndarray


@dataclass(frozen=True, eq=False)
class SkblPredictive:
    """Skew-normal predictive law of returns given views.

    ``params`` is ``SNT(tau0, tau1, mu_bl - s, sigma + sigma_bl)``.
    """

    params: SntParams
    s: np.ndarray
    mu_bl: np.ndarray
    sigma_bl: np.ndarray
    delta: np.ndarray
    lambda1_star: np.ndarray

    @property
    def tau0(self):
        return self.params.lambda0

    @property
    def tau1(self):
        return self.params.lambda1

    @property
    def location(self):
        return self.params.mu

    @property
    def scale(self):
        return self.params.sigma


def _check_views(prior, views):
    if views.k != prior.k:
        raise DimensionError(f"views cover {views.k} assets but the prior has {prior.k}")


def bl_posterior(prior, views):
    """Posterior ``N(mu_bl, sigma_bl)`` of expected returns given the views."""
    _check_views(prior, views)
    try:
        prior_precision = spd_inv(prior.tau * prior.sigma)
    except ParameterError as exc:
        raise ParameterError(f"tau * sigma is singular: {exc}") from exc
    omega_inv = np.diag(1.0 / np.diag(views.omega_v))
    precision = prior_precision + views.P.T @ omega_inv @ views.P
    sigma_bl = spd_inv(precision)
    mu_bl = sigma_bl @ (prior_precision @ prior.pi + views.P.T @ omega_inv @ views.v)
    return BlPosterior(mu_bl=mu_bl, sigma_bl=sigma_bl)


def bl_predictive(prior, views):
    """Normal predictive ``R | V = v ~ N(mu_bl, sigma + sigma_bl)``; returns ``(mean, cov)``."""
    post = bl_posterior(prior, views)
    cov = prior.sigma + post.sigma_bl
    return post.mu_bl, 0.5 * (cov + cov.T)


def bl_optimize(pred_mu, pred_cov, M):
    """Minimum-variance weights with ``pred_mu'w = M`` and ``1'w = 1``."""
    pred_mu = as_vector(pred_mu, "pred_mu")
    k = pred_mu.size
    if k < 2:
        raise DimensionError("two constraints need at least two assets")
    V = np.column_stack([np.ones(k), pred_mu])
    w, _, _ = lagrange_portfolio(pred_cov, V, [1.0, float(M)])
    return w


def skbl_predictive(prior, views, lambda1, lambda0=0.0):
    """Skew-normal predictive law of returns given views.

    Parameters
    ----------
    prior, views
        Market prior and investor views.
    lambda1, lambda0
        Skew parameters of the return law ``SNT(lambda0, lambda1, m - s, sigma)``,
        sharing ``sigma`` with the prior.

    Returns
    -------
    SkblPredictive
        ``SNT(tau0, tau1, mu_bl - s, sigma + sigma_bl)`` where, with
        ``Delta = (sigma^{-1} + sigma_bl^{-1})^{-1}`` and
        ``l* = -Delta^{1/2} sigma^{-1/2} lambda1``,
        ``tau0 = lambda0 / sqrt(1 + l*'l*)`` and
        ``tau1 = (sigma + sigma_bl)^{-1/2} sigma^{1/2} lambda1 / sqrt(1 + l*'l*)``.
    """
    post = bl_posterior(prior, views)
    sigma = prior.sigma
    skew = SntParams(lambda0, lambda1, np.zeros(prior.k), sigma)
    s = skew.shift()

    # Delta = sigma - sigma (sigma + sigma_bl)^{-1} sigma avoids inverting sigma_bl
    total = 0.5 * (sigma + post.sigma_bl + (sigma + post.sigma_bl).T)
    delta = sigma - sigma @ np.linalg.solve(total, sigma)
    delta = 0.5 * (delta + delta.T)
    lambda1_star = -sym_sqrt(delta) @ (skew.sigma_inv_sqrt @ skew.lambda1)
    root = np.sqrt(1.0 + lambda1_star @ lambda1_star)
    _, total_inv_sqrt = sym_sqrt_pair(total)
    tau0 = skew.lambda0 / root
    tau1 = total_inv_sqrt @ (skew.sigma_sqrt @ skew.lambda1) / root
    params = SntParams(tau0, tau1, post.mu_bl - s, total)
    return SkblPredictive(
        params=params,
        s=s,
        mu_bl=post.mu_bl,
        sigma_bl=post.sigma_bl,
        delta=delta,
        lambda1_star=lambda1_star,
    )


def skbl_portfolio_law(pred, w):
    """Univariate SNT law of ``w'R`` under the skew-normal predictive."""
    if pred.tau0 != 0.0:
        raise UnsupportedParameterError("portfolio laws are reported for lambda0 = 0 only")
    return snt_portfolio_marginal(pred.params, w)
