"""Gaussian kernel density estimation, plain and boundary-corrected.

Excesses live on ``[0, inf)`` and their density jumps at the origin. The
boundary model shifts the ordinary KDE right by a small ``epsilon`` and
renormalises it so that it integrates to one on the evaluation grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, DegenerateDensityError, DomainError

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
# caps the temporary (points x centers) matrix at ~32 MB
_CHUNK_CELLS = 4_000_000

#: Boundary shift as a fraction of the bandwidth.
EPSILON_FRACTION = 0.01


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``points`` nodes spanning ``[lo, hi]``."""

    lo: float
    hi: float
    points: int = 2048

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and self.lo < self.hi):
            raise DomainError(f"grid needs finite lo < hi, got [{self.lo}, {self.hi}]")
        if self.points < 64:
            raise DomainError(f"grid needs at least 64 points, got {self.points}")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.points - 1)

    def integrate(self, values: np.ndarray) -> float:
        """Trapezoidal integral of ``values`` sampled at :attr:`nodes`."""
        return float(np.trapezoid(values, dx=self.spacing))


def _centers(centers) -> np.ndarray:
    c = np.asarray(centers, dtype=float).ravel()
    if c.size == 0:
        raise DomainError("KDE needs at least one center")
    if not np.all(np.isfinite(c)):
        raise DomainError("KDE centers must be finite")
    return c


def kde_raw(centers, bandwidth: float, y):
    """``(1/(N h)) * sum_i K((y - x_i)/h)`` with the standard normal kernel ``K``."""
    c = _centers(centers)
    if not bandwidth > 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth}")
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty(y_arr.shape, dtype=float)
    flat_y = y_arr.ravel()
    flat_out = out.reshape(-1)
    step = max(1, _CHUNK_CELLS // c.size)
    norm = _INV_SQRT_2PI / (c.size * bandwidth)
    for start in range(0, flat_y.size, step):
        block = flat_y[start : start + step]
        z = (block[:, None] - c[None, :]) / bandwidth
        flat_out[start : start + step] = np.exp(-0.5 * z * z).sum(axis=1) * norm
    return float(out[0]) if np.ndim(y) == 0 else out


def silverman_bandwidth(centers) -> float:
    """Rule-of-thumb bandwidth ``0.9 * min(sd, IQR/1.34) * N^(-1/5)``."""
    c = _centers(centers)
    if c.size < 2 or np.ptp(c) == 0:
        raise DegenerateDataError("bandwidth needs at least two distinct centers")
    sd = float(np.std(c, ddof=1))
    q75, q25 = np.percentile(c, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34)
    if spread <= 0:
        # more than half the points tied; IQR vanishes but sd does not
        spread = sd
    return 0.9 * spread * c.size ** (-0.2)


@dataclass(frozen=True)
class KdeModel:
    centers: np.ndarray
    bandwidth: float
    epsilon: float
    normalizer: float

    def evaluate(self, y):
        """Boundary-corrected density; zero for ``y < 0``."""
        y_arr = np.asarray(y, dtype=float)
        vals = np.asarray(kde_raw(self.centers, self.bandwidth, y_arr - self.epsilon)) / self.normalizer
        vals = np.where(y_arr >= 0, vals, 0.0)
        return float(vals) if np.ndim(y) == 0 else vals

    __call__ = evaluate


def kde_boundary(centers, bandwidth: float, epsilon: float | None, grid: Grid) -> KdeModel:
    """Shift the KDE by ``epsilon`` and renormalise it on ``grid``.

    ``epsilon=None`` selects ``EPSILON_FRACTION * bandwidth``.
    """
    c = _centers(centers)
    if not bandwidth > 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth}")
    if epsilon is None:
        epsilon = EPSILON_FRACTION * bandwidth
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if grid.lo > 0:
        raise DomainError("boundary KDE grid must start at or below 0")
    nodes = grid.nodes
    shifted = np.where(nodes >= 0, kde_raw(c, bandwidth, nodes - epsilon), 0.0)
    z = grid.integrate(shifted)
    if z <= 1e-300:
        raise DegenerateDensityError("boundary KDE has no mass on [0, inf)")
    c = c.copy()
    c.setflags(write=False)
    return KdeModel(centers=c, bandwidth=float(bandwidth), epsilon=float(epsilon), normalizer=z)
