"""Independent reference computations used by the tests.

Nothing here calls the package's own linear algebra; roots come from
scipy.linalg.sqrtm, densities from scipy.stats, QPs from a null-space solve.
"""

import numpy as np
from scipy import integrate, linalg, stats


def snt_pdf(x, lambda0, lambda1, mu, sigma):
    """Direct SNT density at the rows of ``x``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    lambda1 = np.asarray(lambda1, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    root = np.real(linalg.sqrtm(sigma))
    slant = np.linalg.solve(root, lambda1)
    base = stats.multivariate_normal(mean=mu, cov=sigma).pdf(x)
    skew = stats.norm.cdf(lambda0 + (x - mu) @ slant)
    return base * skew / stats.norm.cdf(lambda0 / np.sqrt(1.0 + lambda1 @ lambda1))


def integrate_1d(f, lo, hi):
    value, _ = integrate.quad(f, lo, hi, epsabs=1e-12, epsrel=1e-12, limit=400)
    return value


def integrate_2d(f, box):
    (x0, x1), (y0, y1) = box
    value, _ = integrate.dblquad(lambda y, x: f(x, y), x0, x1, y0, y1, epsabs=1e-10, epsrel=1e-10)
    return value


def bl_conditional(pi, sigma, tau, P, omega, v):
    """Posterior of the mean by Gaussian conditioning on the views (Woodbury form)."""
    prior_cov = tau * sigma
    gain = prior_cov @ P.T @ np.linalg.inv(P @ prior_cov @ P.T + omega)
    return pi + gain @ (v - P @ pi), prior_cov - gain @ P @ prior_cov


def nullspace_qp(S, A, b):
    """min 1/2 w'Sw subject to A w = b, by the null-space method."""
    w0 = np.linalg.lstsq(A, b, rcond=None)[0]
    Z = linalg.null_space(A)
    if Z.shape[1] == 0:
        return w0
    y = -np.linalg.solve(Z.T @ S @ Z, Z.T @ S @ w0)
    return w0 + Z @ y


def skbl_mixing_density_1d(r, pi, sigma2, tau, p, v, omega, lambda0, lambda1):
    """Predictive density of one asset by integrating the conditional SNT law over the posterior of m."""
    post_var = 1.0 / (1.0 / (tau * sigma2) + p * p / omega)
    post_mean = post_var * (pi / (tau * sigma2) + p * v / omega)
    sd = np.sqrt(sigma2)
    a = lambda0 / np.sqrt(1.0 + lambda1**2)
    h = stats.norm.pdf(a) / stats.norm.cdf(a)
    s = h * sd * lambda1 / np.sqrt(1.0 + lambda1**2)
    post_sd = np.sqrt(post_var)

    norm_const = stats.norm.cdf(a)

    def integrand(m):
        z = (r - m + s) / sd
        cond = stats.norm.pdf(z) / sd * stats.norm.cdf(lambda0 + lambda1 * z) / norm_const
        return cond * stats.norm.pdf(m, post_mean, post_sd)

    lo, hi = post_mean - 12 * post_sd, post_mean + 12 * post_sd
    return integrate_1d(integrand, lo, hi)


def skbl_mixing_density_gh(r, post_mean, post_cov, sigma, lambda0, lambda1, order=60):
    """Same mixing integral for k = 2 via tensor Gauss-Hermite quadrature."""
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    weights = weights / np.sqrt(2.0 * np.pi)
    L = np.linalg.cholesky(post_cov)
    g1, g2 = np.meshgrid(nodes, nodes, indexing="ij")
    z = np.column_stack([g1.ravel(), g2.ravel()])
    wts = np.outer(weights, weights).ravel()
    m = post_mean + z @ L.T
    root = np.real(linalg.sqrtm(sigma))
    lambda1 = np.asarray(lambda1, dtype=float)
    a = lambda0 / np.sqrt(1.0 + lambda1 @ lambda1)
    h = stats.norm.pdf(a) / stats.norm.cdf(a)
    s = h * root @ lambda1 / np.sqrt(1.0 + lambda1 @ lambda1)
    slant = np.linalg.solve(root, lambda1)
    dev = r - (m - s)
    base = stats.multivariate_normal(mean=np.zeros(2), cov=sigma).pdf(dev)
    skew = stats.norm.cdf(lambda0 + dev @ slant) / stats.norm.cdf(a)
    return float(np.sum(wts * base * skew))


def random_spd(rng, k, scale=1.0, min_eig=0.2):
    A = rng.standard_normal((k, k))
    Q, _ = np.linalg.qr(A)
    eig = rng.uniform(min_eig, 1.5, size=k)
    return scale * (Q * eig) @ Q.T
