"""Hidden-truncation skew-normal (SNT) distributions.

A k-dimensional ``X ~ SNT_k(lambda0, lambda1, mu, sigma)`` has density::

    f(x) = phi_k(x; mu, sigma) * Phi(lambda0 + lambda1' sigma^{-1/2} (x - mu))
           / Phi(lambda0 / sqrt(1 + lambda1' lambda1))

Every matrix square root here is the symmetric positive root, so the
parameters (and everything derived from them, such as affine images) are
uniquely defined.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._linalg import (
    as_matrix,
    as_vector,
    check_spd,
    inverse_mills,
    norm_cdf,
    norm_logcdf,
    norm_logpdf,
    sym_sqrt_pair,
)
from .exceptions import DataError, DimensionError, ParameterError, UnsupportedParameterError

__all__ = [
    "SntParams",
    "UnivariateSnt",
    "snt_logpdf",
    "snt_density",
    "snt_log_mgf",
    "snt_mgf",
    "snt_mean",
    "snt_cov",
    "snt_affine",
    "snt_portfolio_marginal",
    "snt_sample",
    "expected_normal_cdf",
]


@dataclass(frozen=True, eq=False)
class SntParams:
    """Parameters ``(lambda0, lambda1, mu, sigma)`` of a k-dimensional SNT law.

    ``sigma`` is the scale matrix, not the covariance; see :func:`snt_cov`.
    """

    lambda0: float
    lambda1: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = as_vector(self.mu, "mu")
        k = mu.shape[0]
        lambda1 = as_vector(self.lambda1, "lambda1", size=k)
        sigma = as_matrix(self.sigma, "sigma")
        if sigma.shape != (k, k):
            raise DimensionError(f"sigma must be {k}x{k}, got {sigma.shape}")
        sigma, _, _ = check_spd(sigma)
        lambda0 = float(self.lambda0)
        if not np.isfinite(lambda0):
            raise ParameterError("lambda0 must be finite")
        for name, value in (("lambda0", lambda0), ("lambda1", lambda1), ("mu", mu), ("sigma", sigma)):
            if isinstance(value, np.ndarray):
                value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def normal(cls, mu, sigma):
        mu = as_vector(mu, "mu")
        return cls(0.0, np.zeros_like(mu), mu, sigma)

    @property
    def k(self):
        return self.mu.shape[0]

    @cached_property
    def _roots(self):
        return sym_sqrt_pair(self.sigma)

    @cached_property
    def _log_norm(self):
        # -log sqrt(det(2 pi sigma)) - log Phi(normalizer_arg), constant across points
        _, logdet = np.linalg.slogdet(self.sigma)
        return -0.5 * (logdet + self.k * np.log(2.0 * np.pi)) - float(norm_logcdf(self.normalizer_arg))

    @property
    def sigma_sqrt(self):
        return self._roots[0]

    @property
    def sigma_inv_sqrt(self):
        return self._roots[1]

    @property
    def normalizer_arg(self):
        """``lambda0 / sqrt(1 + lambda1' lambda1)``, the argument of the normalizing Phi."""
        return self.lambda0 / np.sqrt(1.0 + self.lambda1 @ self.lambda1)

    def h(self):
        """Inverse Mills ratio ``phi(a) / Phi(a)`` at the normalizer argument."""
        return float(inverse_mills(self.normalizer_arg))

    def shift(self):
        """Mean offset ``s = E[X] - mu = h * sigma^{1/2} lambda1 / sqrt(1 + lambda1' lambda1)``."""
        return self.h() * (self.sigma_sqrt @ self.lambda1) / np.sqrt(1.0 + self.lambda1 @ self.lambda1)

    def with_location(self, mu):
        return SntParams(self.lambda0, self.lambda1, mu, self.sigma)

    def __repr__(self):
        return (
            f"SntParams(lambda0={self.lambda0!r}, lambda1={self.lambda1.tolist()!r}, "
            f"mu={self.mu.tolist()!r}, sigma={self.sigma.tolist()!r})"
        )


@dataclass(frozen=True)
class UnivariateSnt:
    """One-dimensional SNT law, typically the return of a portfolio."""

    tau0: float
    tau1: float
    mu: float
    sigma2: float

    def __post_init__(self):
        for name in ("tau0", "tau1", "mu", "sigma2"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ParameterError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.sigma2 <= 0:
            raise ParameterError(f"sigma2 must be positive, got {self.sigma2}")

    def as_params(self):
        return SntParams(self.tau0, [self.tau1], [self.mu], [[self.sigma2]])

    def _cumulant_terms(self):
        # derivatives of log Phi(a + c t) at t = 0 drive cumulants 2 and 3
        root = np.sqrt(1.0 + self.tau1**2)
        a = self.tau0 / root
        c = self.tau1 * np.sqrt(self.sigma2) / root
        z = float(inverse_mills(a))
        g2 = -z * (a + z)
        g3 = -g2 * (a + z) - z * (1.0 + g2)
        return a, c, z, g2, g3

    def mean(self):
        _, c, z, _, _ = self._cumulant_terms()
        return self.mu + c * z

    def variance(self):
        _, c, _, g2, _ = self._cumulant_terms()
        return self.sigma2 + c**2 * g2

    def third_central_moment(self):
        _, c, _, _, g3 = self._cumulant_terms()
        return c**3 * g3

    def skewness(self):
        """Standardized third moment. Distinct from the shape parameter ``tau1``."""
        return self.third_central_moment() / self.variance() ** 1.5

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        sd = np.sqrt(self.sigma2)
        z = (x - self.mu) / sd
        a = self.tau0 / np.sqrt(1.0 + self.tau1**2)
        return norm_logpdf(z) - np.log(sd) + norm_logcdf(self.tau0 + self.tau1 * z) - norm_logcdf(a)

    def pdf(self, x):
        return np.exp(self.logpdf(x))


def _points(p, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != p.k:
        raise DimensionError(f"points must have trailing dimension {p.k}, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DataError("evaluation points must be finite")
    return x


def snt_logpdf(p, x):
    """Log density at a single point (shape ``(k,)``) or at the rows of ``x``."""
    x = _points(p, x)
    z = (x - p.mu) @ p.sigma_inv_sqrt
    skew_arg = p.lambda0 + z @ p.lambda1
    return p._log_norm - 0.5 * np.sum(z * z, axis=-1) + norm_logcdf(skew_arg)


def snt_density(p, x):
    return np.exp(snt_logpdf(p, x))


def snt_log_mgf(p, s):
    s = _points(p, s)
    root = np.sqrt(1.0 + p.lambda1 @ p.lambda1)
    gauss = s @ p.mu + 0.5 * np.einsum("...i,ij,...j->...", s, p.sigma, s)
    skew_arg = (p.lambda0 + s @ (p.sigma_sqrt @ p.lambda1)) / root
    return gauss + norm_logcdf(skew_arg) - norm_logcdf(p.normalizer_arg)


def snt_mgf(p, s):
    return np.exp(snt_log_mgf(p, s))


def snt_mean(p):
    return p.mu + p.shift()


def snt_cov(p):
    """Covariance ``sigma - (a h + h^2) sigma^{1/2} l l' sigma^{1/2} / (1 + l'l)``."""
    a = p.normalizer_arg
    h = p.h()
    u = p.sigma_sqrt @ p.lambda1
    cov = p.sigma - (a * h + h * h) * np.outer(u, u) / (1.0 + p.lambda1 @ p.lambda1)
    return 0.5 * (cov + cov.T)


def snt_affine(p, A, b=None):
    """Law of ``A X + b``; ``A`` is m x k with full row rank."""
    A = as_matrix(A, "A")
    m, k = A.shape
    if k != p.k:
        raise DimensionError(f"A must have {p.k} columns, got {k}")
    if m > k:
        raise DimensionError(f"A has {m} rows but the law has dimension {k}; A A' would be singular")
    b = np.zeros(m) if b is None else as_vector(b, "b", size=m)
    sigma_y = A @ p.sigma @ A.T
    sigma_y = 0.5 * (sigma_y + sigma_y.T)
    try:
        sy_sqrt, sy_inv_sqrt = sym_sqrt_pair(sigma_y)
    except ParameterError as exc:
        raise DimensionError(f"A is rank deficient: {exc}") from exc
    proj = A @ (p.sigma_sqrt @ p.lambda1)  # H' lambda1 with H = sigma^{1/2} A'
    residual = p.lambda1 @ p.lambda1 - proj @ (sy_inv_sqrt @ (sy_inv_sqrt @ proj))
    denom = np.sqrt(1.0 + max(residual, 0.0))
    tau0 = p.lambda0 / denom
    tau1 = (sy_inv_sqrt @ proj) / denom
    return SntParams(tau0, tau1, b + A @ p.mu, sigma_y)


def snt_portfolio_marginal(p, w):
    w = as_vector(w, "w", size=p.k)
    if not np.any(w):
        raise DataError("portfolio weights must not be all zero")
    y = snt_affine(p, w[None, :])
    return UnivariateSnt(y.lambda0, y.lambda1[0], y.mu[0], y.sigma[0, 0])


def expected_normal_cdf(a, b, mu, sigma):
    """``E[Phi(a'X + b)]`` for ``X ~ N(mu, sigma)``, equal to ``Phi((b + a'mu) / sqrt(1 + a' sigma a))``.

    This identity is what turns the skew factor into the normalizing constant
    and the MGF's Phi term.
    """
    a = as_vector(a, "a")
    mu = as_vector(mu, "mu", size=a.size)
    sigma = as_matrix(sigma, "sigma", shape=(a.size, a.size))
    return float(norm_cdf((float(b) + a @ mu) / np.sqrt(1.0 + a @ sigma @ a)))


def snt_sample(p, n, seed=None):
    """Draw ``n`` samples via ``mu + b |X| + eps`` with ``eps ~ N(0, sigma - b b')``.

    Only ``lambda0 = 0`` has this half-normal representation.
    """
    if p.lambda0 != 0.0:
        raise UnsupportedParameterError("sampling is only available for lambda0 = 0")
    n = int(n)
    if n < 0:
        raise DataError("n must be non-negative")
    rng = np.random.default_rng(seed)
    b = (p.sigma_sqrt @ p.lambda1) / np.sqrt(1.0 + p.lambda1 @ p.lambda1)
    spherical = p.sigma - np.outer(b, b)
    chol = np.linalg.cholesky(0.5 * (spherical + spherical.T))
    half = np.abs(rng.standard_normal(n))
    eps = rng.standard_normal((n, p.k)) @ chol.T
    return p.mu + half[:, None] * b + eps
