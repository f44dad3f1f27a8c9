"""Small dense linear-algebra and normal-distribution helpers shared by all modules."""

import numpy as np
from scipy import special

from .exceptions import DimensionError, ParameterError

PD_TOLERANCE = 1e-10

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def as_vector(x, name="x", size=None):
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be a vector, got shape {arr.shape}")
    if size is not None and arr.shape[0] != size:
        raise DimensionError(f"{name} must have length {size}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains non-finite entries")
    return arr


def as_matrix(a, name="A", shape=None):
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a matrix, got shape {arr.shape}")
    if shape is not None and arr.shape != tuple(shape):
        raise DimensionError(f"{name} must have shape {tuple(shape)}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains non-finite entries")
    return arr


def check_spd(sigma, name="sigma", tol=PD_TOLERANCE):
    """Symmetrize ``sigma`` and reject it unless min eig > tol * max eig.

    Returns the symmetrized matrix together with its eigendecomposition so the
    caller can reuse it for square roots.
    """
    sigma = as_matrix(sigma, name)
    if sigma.shape[0] != sigma.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {sigma.shape}")
    if not np.allclose(sigma, sigma.T, rtol=1e-10, atol=1e-14 * max(1.0, np.abs(sigma).max())):
        raise ParameterError(f"{name} is not symmetric")
    sigma = 0.5 * (sigma + sigma.T)
    evals, evecs = np.linalg.eigh(sigma)
    if evals[-1] <= 0 or evals[0] <= tol * evals[-1]:
        raise ParameterError(
            f"{name} is not positive definite (eigenvalues {evals[0]:.3g} .. {evals[-1]:.3g})"
        )
    return sigma, evals, evecs


def sym_sqrt(sigma):
    """Symmetric positive square root of an SPD matrix."""
    _, evals, evecs = check_spd(sigma)
    return (evecs * np.sqrt(evals)) @ evecs.T


def sym_inv_sqrt(sigma):
    _, evals, evecs = check_spd(sigma)
    return (evecs / np.sqrt(evals)) @ evecs.T


def sym_sqrt_pair(sigma):
    """Return ``(sigma^{1/2}, sigma^{-1/2})`` from one eigendecomposition."""
    _, evals, evecs = check_spd(sigma)
    root = np.sqrt(evals)
    return (evecs * root) @ evecs.T, (evecs / root) @ evecs.T


def spd_inv(sigma):
    _, evals, evecs = check_spd(sigma)
    return (evecs / evals) @ evecs.T


# Normal distribution. scipy's ndtr/log_ndtr are erf/erfc based and stay
# accurate far into the lower tail, which covers the log-space requirement.

def norm_pdf(x):
    return np.exp(-0.5 * np.square(x) - _LOG_SQRT_2PI)


def norm_logpdf(x):
    return -0.5 * np.square(x) - _LOG_SQRT_2PI


def norm_cdf(x):
    return special.ndtr(x)


def norm_logcdf(x):
    return special.log_ndtr(x)


def inverse_mills(x):
    """phi(x) / Phi(x), evaluated in log space."""
    return np.exp(norm_logpdf(x) - norm_logcdf(x))


def mvn_logpdf(x, mean, sigma):
    """Log density of N(mean, sigma) at the rows of ``x`` (or a single vector)."""
    x = np.asarray(x, dtype=float)
    _, evals, evecs = check_spd(sigma)
    diff = x - mean
    z = (diff @ evecs) / np.sqrt(evals)
    k = evals.shape[0]
    quad = np.sum(np.square(z), axis=-1)
    return -0.5 * quad - 0.5 * np.sum(np.log(evals)) - k * _LOG_SQRT_2PI
