"""Generalized Pareto distribution for threshold excesses.

All functions take the excess variable ``y`` (data minus threshold) and accept
scalars or arrays. Evaluations outside the support return the natural limit
(density 0, CDF 0 below the origin and 1 past a finite upper endpoint) so
diagnostic grids may overrun bounded supports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .sample import Sample

#: Below this |xi| the exponential branch is used.
XI_ZERO = 1e-12


@dataclass(frozen=True)
class GpdParams:
    """Shape ``xi`` (dimensionless) and scale ``sigma`` (data units)."""

    xi: float
    sigma: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.xi) and np.isfinite(self.sigma)):
            raise DomainError(f"non-finite GPD parameters: {self}")
        if self.sigma <= 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    @property
    def upper_endpoint(self) -> float:
        """Right end of the support (``inf`` unless xi < 0)."""
        if self.xi < -XI_ZERO:
            return -self.sigma / self.xi
        return np.inf


def _check_y(y) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("GPD evaluated at a non-finite point")
    return arr


def _scalar_or_array(out: np.ndarray, like):
    return float(out) if np.ndim(like) == 0 else out


def gpd_cdf(p: GpdParams, y):
    """Distribution function ``H(y) = 1 - (1 + xi*y/sigma)_+^(-1/xi)``."""
    y_arr = _check_y(y)
    z = y_arr / p.sigma
    out = np.zeros_like(z)
    pos = z > 0
    zp = z[pos]
    if abs(p.xi) < XI_ZERO:
        out[pos] = -np.expm1(-zp)
    else:
        t = p.xi * zp
        inside = t > -1.0
        vals = np.ones_like(zp)
        vals[inside] = -np.expm1(-np.log1p(t[inside]) / p.xi)
        out[pos] = vals
    return _scalar_or_array(np.clip(out, 0.0, 1.0), y)


def gpd_sf(p: GpdParams, y):
    """Survival function ``1 - H(y)``, computed without cancellation."""
    y_arr = _check_y(y)
    z = y_arr / p.sigma
    out = np.ones_like(z)
    pos = z > 0
    zp = z[pos]
    if abs(p.xi) < XI_ZERO:
        out[pos] = np.exp(-zp)
    else:
        t = p.xi * zp
        inside = t > -1.0
        vals = np.zeros_like(zp)
        vals[inside] = np.exp(-np.log1p(t[inside]) / p.xi)
        out[pos] = vals
    return _scalar_or_array(out, y)


def gpd_logpdf(p: GpdParams, y):
    y_arr = _check_y(y)
    z = y_arr / p.sigma
    out = np.full_like(z, -np.inf)
    ok = z >= 0
    if abs(p.xi) < XI_ZERO:
        out[ok] = -np.log(p.sigma) - z[ok]
    else:
        t = p.xi * z
        ok &= t > -1.0
        out[ok] = -np.log(p.sigma) - (1.0 / p.xi + 1.0) * np.log1p(t[ok])
    return _scalar_or_array(out, y)


def gpd_pdf(p: GpdParams, y):
    """Density ``(1/sigma) (1 + xi*y/sigma)^(-1/xi - 1)`` on the support, else 0."""
    out = np.exp(np.asarray(gpd_logpdf(p, y)))
    return _scalar_or_array(out, y)


def gpd_quantile(p: GpdParams, q):
    """Inverse of :func:`gpd_cdf` for ``0 < q < 1``."""
    q_arr = np.asarray(q, dtype=float)
    if not np.all((q_arr > 0) & (q_arr < 1)):
        raise DomainError("quantile level must lie in the open interval (0, 1)")
    log_sf = np.log1p(-q_arr)
    if abs(p.xi) < XI_ZERO:
        out = -p.sigma * log_sf
    else:
        out = p.sigma * np.expm1(-p.xi * log_sf) / p.xi
    return _scalar_or_array(out, q)


def gpd_sample(p: GpdParams, n: int, seed: int) -> Sample:
    """Draw ``n`` excesses by inverse-transform sampling with a PCG64 stream."""
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    # uniform on [0, 1); 1 - U lies in (0, 1] which keeps log finite
    u = 1.0 - rng.random(n)
    log_sf = np.log(u)
    if abs(p.xi) < XI_ZERO:
        y = -p.sigma * log_sf
    else:
        y = p.sigma * np.expm1(-p.xi * log_sf) / p.xi
    return Sample(y, source="gpd_sample", meta={"xi": p.xi, "sigma": p.sigma, "seed": seed})
