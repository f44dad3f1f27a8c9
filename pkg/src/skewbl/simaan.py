"""Simaan decomposition of an SNT law and the mean/variance/skewness optimizer.

With ``lambda0 = 0`` an SNT vector can be written ``R = mu + b|X| + eps``
where ``|X|`` is half-normal and ``eps ~ N(0, S)`` is spherical noise. The
portfolio variance then splits into a non-spherical part
``(1 - 2/pi) (w'b)^2`` and a spherical part ``w'Sw``. Skewness depends only on
the first, so efficient portfolios minimize ``w'Sw`` at fixed mean ``M`` and
fixed loading ``N = w'b``.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy import linalg

from ._linalg import as_vector, check_spd
from .exceptions import (
    DecompositionError,
    DegenerateConstraintsError,
    DimensionError,
    NumericalError,
    ParameterError,
    SingularSkewError,
    UnsupportedParameterError,
)
from .sntdist import SntParams, snt_portfolio_marginal

__all__ = [
    "SIGMA2_ABS_X",
    "SimaanRep",
    "PortfolioSolution",
    "simaan_from_snt",
    "portfolio_variance",
    "lagrange_portfolio",
    "basis_portfolios",
    "optimize_mvs",
    "frontier_sweep",
]

#: Variance of |N(0, 1)|.
SIGMA2_ABS_X = 1.0 - 2.0 / np.pi

GRAM_CONDITION_LIMIT = 1e12
DELTA_LIMIT = 1.0 - 1e-12


@dataclass(frozen=True, eq=False)
class SimaanRep:
    """``R = mu + W delta |X| + W (I - D^2)^{1/2} Z`` with ``Z ~ N(0, Psi)``.

    Attributes
    ----------
    b : ndarray (k,)
        Non-spherical loading ``W delta``.
    S : ndarray (k, k)
        Spherical covariance ``sigma - b b'``.
    sigma2_absX : float
        Variance of the half-normal factor, ``1 - 2/pi``.
    delta : ndarray (k,)
        Per-asset skew correlations, all strictly inside (-1, 1).
    W : ndarray (k, k)
        Diagonal matrix of scale standard deviations.
    Psi : ndarray (k, k)
        Correlation matrix of ``Z``.
    source : SntParams or None
        The law this decomposition came from, kept so portfolio skew
        parameters can be reported.
    """

    b: np.ndarray
    S: np.ndarray
    sigma2_absX: float
    delta: np.ndarray
    W: np.ndarray
    Psi: np.ndarray
    source: SntParams = field(default=None, repr=False)

    @property
    def k(self):
        return self.b.shape[0]

    @property
    def sigma(self):
        """Scale matrix of the source law, ``b b' + S``."""
        return np.outer(self.b, self.b) + self.S

    @property
    def covariance(self):
        """Covariance of R, ``sigma2_absX b b' + S``."""
        return self.sigma2_absX * np.outer(self.b, self.b) + self.S


@dataclass(frozen=True, eq=False)
class PortfolioSolution:
    """One point of the (M, N) frontier.

    ``variance`` is the total return variance ``w' sigma w - (2/pi) N^2``.
    ``status`` is ``"ok"`` or a message describing why the point failed, in
    which case the numeric fields are NaN.
    """

    w: np.ndarray
    M: float
    N: float
    variance: float
    tau1_w: float = float("nan")
    spherical: float = float("nan")
    non_spherical: float = float("nan")
    multipliers: np.ndarray = field(default=None, repr=False)
    coefficients: np.ndarray = field(default=None, repr=False)
    status: str = "ok"

    @property
    def ok(self):
        return self.status == "ok"

    @property
    def volatility(self):
        return float(np.sqrt(self.variance)) if self.variance >= 0 else float("nan")

    @classmethod
    def failed(cls, k, M, N, message):
        nan = float("nan")
        return cls(np.full(k, nan), float(M), float(N), nan, status=message)


def simaan_from_snt(p):
    """Decompose an SNT law with ``lambda0 = 0`` into Simaan form."""
    if p.lambda0 != 0.0:
        raise UnsupportedParameterError("the Simaan representation requires lambda0 = 0")
    sd = np.sqrt(np.diag(p.sigma))
    W = np.diag(sd)
    corr = p.sigma / np.outer(sd, sd)
    alpha = sd * (p.sigma_inv_sqrt @ p.lambda1)
    corr_alpha = corr @ alpha
    delta = corr_alpha / np.sqrt(1.0 + alpha @ corr_alpha)
    if np.any(np.abs(delta) >= DELTA_LIMIT):
        raise SingularSkewError(f"|delta| reaches 1 (max {np.abs(delta).max():.17g})")
    scale = 1.0 / np.sqrt(1.0 - delta**2)
    Psi = scale[:, None] * (corr - np.outer(delta, delta)) * scale[None, :]
    b = sd * delta
    S = p.sigma - np.outer(b, b)
    S = 0.5 * (S + S.T)
    try:
        check_spd(S, "S")
    except ParameterError as exc:
        raise DecompositionError(str(exc)) from exc
    return SimaanRep(b=b, S=S, sigma2_absX=SIGMA2_ABS_X, delta=delta, W=W, Psi=Psi, source=p)


def portfolio_variance(rep, w):
    """Return ``(total, non_spherical, spherical)`` variance of portfolio ``w``."""
    w = as_vector(w, "w", size=rep.k)
    bw = float(w @ rep.b)
    non_spherical = rep.sigma2_absX * bw * bw
    spherical = float(w @ rep.S @ w)
    return non_spherical + spherical, non_spherical, spherical


def _cholesky(S):
    S, _, _ = check_spd(S, "S")
    return linalg.cho_factor(S, lower=True)


def lagrange_portfolio(S, vectors, targets, cho=None):
    """Minimize ``w'Sw / 2`` subject to ``vectors' w = targets``.

    ``vectors`` is k x c. The stationarity condition gives
    ``w = S^{-1} V lam`` and the multipliers solve ``(V' S^{-1} V) lam = targets``.
    Returns ``(w, lam, gram)``.
    """
    V = np.asarray(vectors, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if cho is None:
        cho = _cholesky(S)
    SinvV = linalg.cho_solve(cho, V)
    gram = V.T @ SinvV
    gram = 0.5 * (gram + gram.T)
    # scale-free conditioning: judge the Gram matrix in correlation form
    d = np.sqrt(np.diag(gram))
    if np.any(d == 0):
        raise DegenerateConstraintsError("a constraint vector is zero")
    cond = np.linalg.cond(gram / np.outer(d, d))
    if not np.isfinite(cond) or cond > GRAM_CONDITION_LIMIT:
        raise DegenerateConstraintsError(f"constraint Gram matrix is singular (condition {cond:.3g})")
    lam = linalg.solve(gram, targets, assume_a="sym")
    return SinvV @ lam, lam, gram


def basis_portfolios(rep, mu):
    """The three fully invested portfolios ``S^{-1}v / (1'S^{-1}v)`` for v in (1, mu, b).

    Columns are NaN when ``1'S^{-1}v`` vanishes.
    """
    mu = as_vector(mu, "mu", size=rep.k)
    cho = _cholesky(rep.S)
    V = np.column_stack([np.ones(rep.k), mu, rep.b])
    SinvV = linalg.cho_solve(cho, V)
    sums = SinvV.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        basis = np.where(np.abs(sums) > 1e-14 * np.abs(SinvV).sum(axis=0), SinvV / sums, np.nan)
    return basis


def optimize_mvs(rep, mu, M, N, cho=None):
    """Minimum spherical-variance portfolio with ``1'w = 1``, ``mu'w = M``, ``b'w = N``.

    With Gram constants ``A = 1'S^{-1}1``, ``B = 1'S^{-1}mu``, ``C = mu'S^{-1}mu``,
    ``D = b'S^{-1}1``, ``E = b'S^{-1}mu``, ``F = b'S^{-1}b`` the multipliers solve a
    3x3 system and ``w = c1 w1 + c2 w2 + c3 w3`` with ``c = (lam1 A, lam2 B, lam3 D)``.
    """
    mu = as_vector(mu, "mu", size=rep.k)
    if rep.k < 3:
        raise DimensionError("three constraints need at least three assets")
    if not np.any(rep.b):
        # symmetric law: w'b = 0 for every w, so only N = 0 is attainable
        if N != 0:
            raise DegenerateConstraintsError(f"loading b is zero, so N = {N} is infeasible")
        V = np.column_stack([np.ones(rep.k), mu])
        w, lam2, gram2 = lagrange_portfolio(rep.S, V, [1.0, M], cho=cho)
        lam = np.append(lam2, 0.0)
        gram = np.zeros((3, 3))
        gram[:2, :2] = gram2
    else:
        V = np.column_stack([np.ones(rep.k), mu, rep.b])
        w, lam, gram = lagrange_portfolio(rep.S, V, [1.0, M, N], cho=cho)
    A, B, D = gram[0, 0], gram[0, 1], gram[0, 2]
    coefficients = np.array([lam[0] * A, lam[1] * B, lam[2] * D])
    total, non_spherical, spherical = portfolio_variance(rep, w)
    tau1_w = float("nan")
    if rep.source is not None:
        tau1_w = snt_portfolio_marginal(rep.source, w).tau1
    return PortfolioSolution(
        w=w,
        M=float(M),
        N=float(N),
        variance=total,
        tau1_w=tau1_w,
        spherical=spherical,
        non_spherical=non_spherical,
        multipliers=lam,
        coefficients=coefficients,
    )


def sweep_workers():
    """Worker cap from ``SKEWBL_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("SKEWBL_THREADS", "1")))
    except ValueError:
        return 1


def frontier_sweep(rep, mu, M_grid, N_grid):
    """Solve :func:`optimize_mvs` over the grid, M outer and N inner.

    Degenerate points come back as failed solutions; the sweep continues.
    """
    M_grid = [float(m) for m in M_grid]
    N_grid = [float(n) for n in N_grid]
    if not M_grid or not N_grid:
        raise DimensionError("M_grid and N_grid must be non-empty")
    mu = as_vector(mu, "mu", size=rep.k)
    cho = _cholesky(rep.S)

    def solve(point):
        M, N = point
        try:
            return optimize_mvs(rep, mu, M, N, cho=cho)
        except NumericalError as exc:
            return PortfolioSolution.failed(rep.k, M, N, f"{type(exc).__name__}: {exc}")

    points = list(product(M_grid, N_grid))
    workers = min(sweep_workers(), len(points))
    if workers == 1:
        return [solve(pt) for pt in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(solve, points))
