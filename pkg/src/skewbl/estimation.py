"""Return panels, sample moments, and maximum-likelihood SNT fits.

The fit keeps ``lambda0 = 0``. Internally it works on standardized data and
uses the equivalent slant ``eta = sigma^{-1/2} lambda1``, so that the skew
factor is ``Phi(eta'(x - mu))``. Log-likelihood and gradient are analytic; the
covariance is carried through a Cholesky factor with log-diagonal so every
iterate stays positive definite.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize, stats

from ._linalg import as_matrix, inverse_mills, mvn_logpdf, norm_logcdf, sym_inv_sqrt, sym_sqrt
from .exceptions import DataError, DimensionError
from .simaan import sweep_workers
from .sntdist import SntParams, snt_logpdf, snt_portfolio_marginal

__all__ = [
    "ReturnPanel",
    "FitResult",
    "log_returns",
    "sample_moments",
    "snt_loglik",
    "normal_loglik",
    "fit_snt_mle",
    "lr_test",
]

logger = logging.getLogger(__name__)

_LOG2PI = np.log(2.0 * np.pi)
_LOG2 = np.log(2.0)


@dataclass(frozen=True, eq=False)
class ReturnPanel:
    """T x k matrix of (log-)returns with ticker and date labels."""

    tickers: list
    dates: list
    returns: np.ndarray

    def __post_init__(self):
        returns = np.asarray(self.returns, dtype=float)
        if returns.ndim != 2:
            raise DimensionError(f"returns must be a T x k matrix, got shape {returns.shape}")
        T, k = returns.shape
        tickers = list(self.tickers) if self.tickers is not None else [f"A{j}" for j in range(k)]
        dates = list(self.dates) if self.dates is not None else list(range(T))
        if len(tickers) != k:
            raise DimensionError(f"{len(tickers)} tickers for {k} return columns")
        if len(dates) != T:
            raise DimensionError(f"{len(dates)} dates for {T} return rows")
        bad = np.argwhere(~np.isfinite(returns))
        if bad.size:
            i, j = bad[0]
            raise DataError(f"non-finite return at date {dates[i]!r}, ticker {tickers[j]!r}")
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "returns", returns)

    @property
    def T(self):
        return self.returns.shape[0]

    @property
    def k(self):
        return self.returns.shape[1]

    def check_estimable(self):
        """Require ``T > k + 2`` and non-constant columns."""
        if self.T <= self.k + 2:
            raise DataError(f"need more than k + 2 = {self.k + 2} observations, got {self.T}")
        flat = np.ptp(self.returns, axis=0) == 0
        if np.any(flat):
            raise DataError(f"constant return column(s): {[t for t, f in zip(self.tickers, flat) if f]}")


def log_returns(prices, tickers=None, dates=None):
    """Per-column ``log(p_t / p_{t-1})``. ``dates`` label the price rows."""
    prices = as_matrix(prices, "prices")
    n, k = prices.shape
    tickers = list(tickers) if tickers is not None else [f"A{j}" for j in range(k)]
    dates = list(dates) if dates is not None else list(range(n))
    if len(tickers) != k or len(dates) != n:
        raise DimensionError("tickers/dates do not match the price matrix")
    bad = np.argwhere(prices <= 0)
    if bad.size:
        i, j = bad[0]
        raise DataError(
            f"non-positive price {prices[i, j]!r} at date {dates[i]!r}, ticker {tickers[j]!r}"
        )
    if n < 2:
        raise DataError("need at least two price rows")
    return ReturnPanel(tickers, dates[1:], np.diff(np.log(prices), axis=0))


def _returns_of(panel):
    if isinstance(panel, ReturnPanel):
        return panel.returns
    return as_matrix(panel, "returns")


def sample_moments(panel):
    """Sample mean and unbiased (divisor T - 1) sample covariance."""
    X = _returns_of(panel)
    if X.shape[0] < 2:
        raise DataError("need at least two observations")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (X.shape[0] - 1)
    return mean, 0.5 * (cov + cov.T)


def snt_loglik(params, X):
    """Total log-likelihood of the rows of ``X`` under ``params``."""
    return float(np.sum(snt_logpdf(params, _returns_of(X))))


def normal_loglik(X, mean=None, cov=None):
    """Gaussian log-likelihood; defaults to the MLE (divisor T) fit."""
    X = _returns_of(X)
    if mean is None:
        mean = X.mean(axis=0)
    if cov is None:
        centered = X - mean
        cov = centered.T @ centered / X.shape[0]
    return float(np.sum(mvn_logpdf(X, mean, cov)))


def lr_test(loglik_alt, loglik_null, df):
    """Return ``(2 (l_alt - l_null), chi2_df upper-tail p-value)``."""
    stat = 2.0 * (loglik_alt - loglik_null)
    return stat, float(stats.chi2.sf(max(stat, 0.0), df))


@dataclass(frozen=True, eq=False)
class FitResult:
    params: SntParams
    loglik_snt: float
    loglik_normal: float
    lr_stat: float
    p_value: float
    converged: bool
    iterations: int
    tickers: list = field(default=None)
    fix_sigma: bool = False

    def marginal_tau1(self):
        """Per-asset skew parameter of each one-dimensional marginal."""
        k = self.params.k
        return np.array([snt_portfolio_marginal(self.params, np.eye(k)[j]).tau1 for j in range(k)])


class _Objective:
    """Average negative log-likelihood on standardized data ``Z``.

    Parameter layout: ``mu`` (k), then (unless sigma is fixed) the lower
    triangle of the Cholesky factor with log-diagonal, then ``eta`` (k).
    """

    def __init__(self, Z, fixed_sigma=None):
        self.Z = Z
        self.T, self.k = Z.shape
        self.tril = np.tril_indices(self.k)
        self.diag_mask = self.tril[0] == self.tril[1]
        self.fixed_chol = None if fixed_sigma is None else np.linalg.cholesky(fixed_sigma)

    @property
    def n_chol(self):
        return 0 if self.fixed_chol is not None else len(self.tril[0])

    def pack(self, mu, sigma, eta):
        parts = [mu]
        if self.fixed_chol is None:
            L = np.linalg.cholesky(sigma)
            vals = L[self.tril].copy()
            vals[self.diag_mask] = np.log(vals[self.diag_mask])
            parts.append(vals)
        parts.append(eta)
        return np.concatenate(parts)

    def unpack(self, theta):
        k = self.k
        mu = theta[:k]
        if self.fixed_chol is None:
            vals = theta[k : k + self.n_chol].copy()
            vals[self.diag_mask] = np.exp(vals[self.diag_mask])
            L = np.zeros((k, k))
            L[self.tril] = vals
        else:
            L = self.fixed_chol
        eta = theta[k + self.n_chol :]
        return mu, L, eta

    def __call__(self, theta):
        mu, L, eta = self.unpack(theta)
        T, k = self.T, self.k
        D = self.Z - mu
        Y = linalg.solve_triangular(L, D.T, lower=True)  # L^{-1} d_t as columns
        logdet = 2.0 * np.sum(np.log(np.diag(L)))
        u = D @ eta
        ll = -0.5 * T * (k * _LOG2PI + logdet) - 0.5 * np.sum(Y * Y) + T * _LOG2 + np.sum(norm_logcdf(u))

        zeta = inverse_mills(u)
        SinvD = linalg.solve_triangular(L.T, Y, lower=False)  # sigma^{-1} d_t as columns
        g_mu = SinvD.sum(axis=1) - eta * zeta.sum()
        g_eta = D.T @ zeta
        grads = [g_mu]
        if self.fixed_chol is None:
            Sinv = linalg.cho_solve((L, True), np.eye(k))
            G = -0.5 * T * Sinv + 0.5 * SinvD @ SinvD.T
            gL = (2.0 * G @ L)[self.tril]
            gL[self.diag_mask] *= np.diag(L)
            grads.append(gL)
        grads.append(g_eta)
        grad = np.concatenate(grads)
        return -ll / T, -grad / T


def _method_of_moments_start(Z, fixed_sigma):
    """Starting point from per-coordinate skewness, in standardized units."""
    mean = Z.mean(axis=0)
    cov = np.cov(Z, rowvar=False).reshape(Z.shape[1], Z.shape[1])
    gamma1 = np.clip(stats.skew(Z, axis=0), -0.95, 0.95)
    r = np.cbrt(2.0 * gamma1 / (4.0 - np.pi))
    m = r / np.sqrt(1.0 + r * r)  # E|X|-scaled delta, m = delta sqrt(2/pi)
    delta = np.clip(m / np.sqrt(2.0 / np.pi), -0.99, 0.99)
    omega = np.sqrt(np.diag(cov) / (1.0 - m * m))
    b = omega * delta
    sigma = fixed_sigma if fixed_sigma is not None else cov + (2.0 / np.pi) * np.outer(b, b)
    c = sym_inv_sqrt(sigma) @ b
    norm_c = np.linalg.norm(c)
    if norm_c > 0.95:
        c *= 0.95 / norm_c
        b = sym_sqrt(sigma) @ c
    lambda1 = c / np.sqrt(1.0 - c @ c)
    eta = sym_inv_sqrt(sigma) @ lambda1
    mu = mean - np.sqrt(2.0 / np.pi) * b
    return mu, sigma, eta


def _run_start(objective, theta0, max_iter):
    res = optimize.minimize(
        objective,
        theta0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "ftol": 1e-10, "gtol": 1e-6, "maxls": 50},
    )
    return res


def fit_snt_mle(panel, fix_sigma=False, n_starts=5, max_iter=500, seed=0):
    """Maximum-likelihood fit of ``SNT_k(0, lambda1, mu, sigma)`` plus the LR skewness test.

    Parameters
    ----------
    panel : ReturnPanel or array (T, k)
    fix_sigma : bool
        Hold ``sigma`` at the unbiased sample covariance and fit only
        ``mu`` and ``lambda1``.
    n_starts : int
        Number of quasi-Newton starts: the method-of-moments seed and
        ``n_starts - 1`` random perturbations of it.
    max_iter : int
        Iteration cap per start.
    seed : int
        Seeds the perturbations.

    Returns
    -------
    FitResult
        The best start by log-likelihood (lowest index on ties). The
        Gaussian fit is always a candidate, so ``loglik_snt >= loglik_normal``.
    """
    if not isinstance(panel, ReturnPanel):
        panel = ReturnPanel(None, None, _returns_of(panel))
    panel.check_estimable()
    X = panel.returns
    T, k = X.shape
    center = X.mean(axis=0)
    scale = X.std(axis=0, ddof=1)
    Z = (X - center) / scale
    log_jacobian = T * np.sum(np.log(scale))

    fixed = None
    if fix_sigma:
        fixed = np.corrcoef(Z, rowvar=False).reshape(k, k)
    objective = _Objective(Z, fixed)

    mu0, sigma0, eta0 = _method_of_moments_start(Z, fixed)
    rng = np.random.default_rng(seed)
    starts = [objective.pack(mu0, sigma0, eta0)]
    for _ in range(max(n_starts, 1) - 1):
        eta = eta0 * rng.uniform(0.5, 1.5, size=k) + rng.normal(0.0, 0.5, size=k)
        starts.append(objective.pack(mu0, sigma0, eta))

    workers = min(sweep_workers(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda th: _run_start(objective, th, max_iter), starts))
    else:
        results = [_run_start(objective, th, max_iter) for th in starts]

    # Gaussian fit, eta = 0: a stationary point of the SNT likelihood
    normal_sigma = fixed if fixed is not None else np.cov(Z, rowvar=False, ddof=0).reshape(k, k)
    normal_theta = objective.pack(np.zeros(k), normal_sigma, np.zeros(k))
    normal_value = objective(normal_theta)[0]

    best = min(range(len(results)), key=lambda i: (results[i].fun, i))
    res = results[best]
    theta, value, converged, nit = res.x, res.fun, bool(res.success), int(res.nit)
    if not value <= normal_value:
        theta, value, converged, nit = normal_theta, normal_value, True, 0
    if not converged:
        logger.warning("SNT fit did not converge: %s", res.message)

    mu_z, L, eta_z = objective.unpack(theta)
    sigma_z = L @ L.T
    mu = center + scale * mu_z
    sigma = sigma_z * np.outer(scale, scale)
    eta = eta_z / scale
    params = SntParams(0.0, sym_sqrt(sigma) @ eta, mu, sigma)
    loglik_snt = -T * value - log_jacobian

    if fix_sigma:
        sample_cov = np.cov(X, rowvar=False, ddof=1).reshape(k, k)
        loglik_normal = normal_loglik(X, center, sample_cov)
    else:
        loglik_normal = normal_loglik(X)
    stat, p_value = lr_test(loglik_snt, loglik_normal, k)
    return FitResult(
        params=params,
        loglik_snt=loglik_snt,
        loglik_normal=loglik_normal,
        lr_stat=stat,
        p_value=p_value,
        converged=converged,
        iterations=nit,
        tickers=list(panel.tickers),
        fix_sigma=bool(fix_sigma),
    )
