"""Maximum-likelihood GPD fitting of threshold excesses.

The likelihood is maximised by Nelder-Mead over ``(xi, log sigma)``; the
support constraint ``1 + xi*y_i/sigma > 0`` is enforced by an infeasible
sentinel. Standard errors come from a central finite-difference Hessian of
the log-likelihood in the natural ``(xi, sigma)`` coordinates.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ConvergenceError, DomainError, EmptyExcessError, InsufficientDataError
from .gpd import XI_ZERO, GpdParams
from .sample import Sample, as_array

logger = logging.getLogger(__name__)

MIN_EXCESSES = 10
MAX_ITER = 2000
LOGLIK_TOL = 1e-8
HESSIAN_STEP = 1e-5
# the likelihood is unbounded above for xi < -1
XI_FLOOR = -1.0


@dataclass(frozen=True)
class ExcessSet:
    """Excesses ``x - u`` of the observations above threshold ``u``."""

    threshold: float
    excesses: np.ndarray
    total_count: int

    def __post_init__(self) -> None:
        arr = np.array(self.excesses, dtype=float).ravel()
        if arr.size and not (np.all(np.isfinite(arr)) and np.all(arr > 0)):
            raise DomainError("excesses must be strictly positive and finite")
        if arr.size > self.total_count:
            raise DomainError("more excesses than observations")
        arr.setflags(write=False)
        object.__setattr__(self, "excesses", arr)

    @property
    def exceed_count(self) -> int:
        return int(self.excesses.size)

    @property
    def zeta_u(self) -> float:
        """Fraction of observations above the threshold."""
        return self.exceed_count / self.total_count


@dataclass(frozen=True)
class GpdFit:
    params: GpdParams
    threshold: float
    exceed_count: int
    zeta_u: float
    log_likelihood: float
    se_xi: float
    se_sigma: float
    cov_xi_sigma: float
    iterations: int = 0

    @property
    def xi(self) -> float:
        return self.params.xi

    @property
    def sigma(self) -> float:
        return self.params.sigma

    @property
    def covariance(self) -> np.ndarray:
        """2x2 covariance of ``(xi, sigma)``."""
        return np.array(
            [[self.se_xi**2, self.cov_xi_sigma], [self.cov_xi_sigma, self.se_sigma**2]]
        )


def excesses_over(sample: Sample | np.ndarray, u: float) -> ExcessSet:
    """Collect ``x - u`` for every ``x > u``, preserving order."""
    x = as_array(sample)
    above = x[x > u]
    if above.size == 0:
        raise EmptyExcessError(f"no observation exceeds u={u!r}")
    return ExcessSet(threshold=float(u), excesses=above - u, total_count=int(x.size))


def _loglik(xi: float, sigma: float, y: np.ndarray) -> float:
    n = y.size
    if abs(xi) < XI_ZERO:
        return -n * math.log(sigma) - float(y.sum()) / sigma
    t = xi * y / sigma
    if t.min() <= -1.0:
        return -np.inf
    return -n * math.log(sigma) - (1.0 / xi + 1.0) * float(np.log1p(t).sum())


def gpd_loglik(p: GpdParams, e: ExcessSet | np.ndarray) -> float:
    """GPD log-likelihood of the excesses; ``-inf`` when the support constraint fails."""
    y = e.excesses if isinstance(e, ExcessSet) else np.asarray(e, dtype=float)
    if y.size == 0:
        raise DomainError("log-likelihood of an empty excess set")
    return _loglik(p.xi, p.sigma, y)


def moment_start(y: np.ndarray) -> tuple[float, float]:
    """Method-of-moments starting point, falling back to the exponential fit."""
    mean = float(y.mean())
    var = float(y.var(ddof=1)) if y.size > 1 else 0.0
    if var <= 0:
        return 0.0, mean
    ratio = mean * mean / var
    xi0 = 0.5 * (1.0 - ratio)
    sigma0 = 0.5 * mean * (ratio + 1.0)
    if not np.isfinite(_loglik(xi0, sigma0, y)) or xi0 <= XI_FLOOR:
        return 0.0, mean
    return xi0, sigma0


def _negloglik_reparam(theta: np.ndarray, y: np.ndarray) -> float:
    xi, log_sigma = theta
    if xi <= XI_FLOOR:
        return np.inf
    ll = _loglik(xi, math.exp(log_sigma), y)
    return -ll if np.isfinite(ll) else np.inf


def observed_information(xi: float, sigma: float, y: np.ndarray) -> np.ndarray:
    """Negative Hessian of the log-likelihood in ``(xi, sigma)`` by central differences."""
    theta = np.array([xi, sigma])
    h = np.array([HESSIAN_STEP * max(abs(xi), 1.0), HESSIAN_STEP * sigma])

    def f(t):
        return _loglik(t[0], t[1], y)

    hess = np.empty((2, 2))
    f0 = f(theta)
    for i in range(2):
        ei = np.zeros(2)
        ei[i] = h[i]
        hess[i, i] = (f(theta + ei) - 2.0 * f0 + f(theta - ei)) / h[i] ** 2
    e0 = np.array([h[0], 0.0])
    e1 = np.array([0.0, h[1]])
    hess[0, 1] = hess[1, 0] = (
        f(theta + e0 + e1) - f(theta + e0 - e1) - f(theta - e0 + e1) + f(theta - e0 - e1)
    ) / (4.0 * h[0] * h[1])
    return -hess


def _covariance(info: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(info)):
        return np.full((2, 2), np.nan)
    try:
        np.linalg.cholesky(info)
    except np.linalg.LinAlgError:
        # not a strict local maximum in the interior; no usable standard errors
        return np.full((2, 2), np.nan)
    cov = np.linalg.inv(info)
    return 0.5 * (cov + cov.T)


def fit_gpd(e: ExcessSet, min_excesses: int = MIN_EXCESSES) -> GpdFit:
    """Maximum-likelihood fit of a GPD to an :class:`ExcessSet`.

    Raises:
        InsufficientDataError: fewer than ``min_excesses`` excesses.
        ConvergenceError: Nelder-Mead exhausted its budget; ``err.best`` holds
            the last iterate as a :class:`GpdParams`.
    """
    # sorted so that floating-point sums, and hence the optimum, ignore input order
    y = np.sort(e.excesses)
    if y.size < min_excesses:
        raise InsufficientDataError(
            f"{y.size} excesses above u={e.threshold:g}; at least {min_excesses} required",
            count=int(y.size),
            required=min_excesses,
        )
    xi0, sigma0 = moment_start(y)
    x0 = np.array([xi0, math.log(sigma0)])
    res = minimize(
        _negloglik_reparam,
        x0,
        args=(y,),
        method="Nelder-Mead",
        options={
            "maxiter": MAX_ITER,
            "maxfev": 2 * MAX_ITER,
            "xatol": 1e-10,
            "fatol": LOGLIK_TOL,
            "initial_simplex": np.array(
                [x0, x0 + [0.1, 0.0], x0 + [0.0, 0.1]]
            ),
        },
    )
    xi_hat, sigma_hat = float(res.x[0]), math.exp(float(res.x[1]))
    if not res.success:
        best = GpdParams(xi_hat, sigma_hat)
        raise ConvergenceError(f"GPD likelihood maximisation did not converge: {res.message}", best=best)
    ll = _loglik(xi_hat, sigma_hat, y)
    cov = _covariance(observed_information(xi_hat, sigma_hat, y))
    return GpdFit(
        params=GpdParams(xi_hat, sigma_hat),
        threshold=e.threshold,
        exceed_count=e.exceed_count,
        zeta_u=e.zeta_u,
        log_likelihood=ll,
        se_xi=math.sqrt(cov[0, 0]) if np.isfinite(cov[0, 0]) else np.nan,
        se_sigma=math.sqrt(cov[1, 1]) if np.isfinite(cov[1, 1]) else np.nan,
        cov_xi_sigma=float(cov[0, 1]),
        iterations=int(res.nit),
    )


def fit_threshold(sample: Sample | np.ndarray, u: float, min_excesses: int = MIN_EXCESSES) -> tuple[GpdFit, ExcessSet]:
    e = excesses_over(sample, u)
    return fit_gpd(e, min_excesses=min_excesses), e


def sigma_star(fit: GpdFit) -> tuple[float, float]:
    """Threshold-invariant scale ``sigma - u*xi`` and its delta-method standard error."""
    u = fit.threshold
    value = fit.sigma - u * fit.xi
    var = u * u * fit.se_xi**2 - 2.0 * u * fit.cov_xi_sigma + fit.se_sigma**2
    return value, math.sqrt(max(var, 0.0)) if np.isfinite(var) else np.nan
