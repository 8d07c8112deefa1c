"""Plot data for threshold choice and model checking.

Nothing here renders images. Each series is a small dataclass of aligned
numpy columns that the CLI writes as CSV.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import norm

from .errors import ConvergenceError, DataError, DomainError, InsufficientDataError
from .fit import MIN_EXCESSES, ExcessSet, GpdFit, excesses_over, fit_gpd, sigma_star
from .gpd import XI_ZERO, gpd_cdf, gpd_pdf, gpd_quantile
from .sample import Sample, as_array

logger = logging.getLogger(__name__)

MIN_MEAN_EXCESS_COUNT = 5


def _z(level: float) -> float:
    if not 0 < level < 1:
        raise DomainError(f"confidence level must be in (0, 1), got {level}")
    return float(norm.ppf(0.5 + level / 2.0))


@dataclass(frozen=True)
class LinearSummary:
    """Least-squares line ``y = intercept + slope * x`` and its R^2."""

    slope: float
    intercept: float
    r2: float
    n: int


def linear_summary(x, y) -> LinearSummary:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    if x.size < 2 or np.ptp(x) == 0:
        return LinearSummary(math.nan, math.nan, math.nan, int(x.size))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (intercept + slope * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return LinearSummary(float(slope), float(intercept), r2, int(x.size))


def default_thresholds(sample: Sample | np.ndarray, count: int = 50) -> np.ndarray:
    """``count`` equally spaced thresholds between the 50th and 99th percentiles."""
    lo, hi = np.percentile(as_array(sample), [50, 99])
    return np.linspace(lo, hi, count)


@dataclass(frozen=True)
class MeanExcessSeries:
    u: np.ndarray
    mean: np.ndarray
    se: np.ndarray
    n_excess: np.ndarray


def mean_excess_series(sample: Sample | np.ndarray, thresholds: Sequence[float]) -> MeanExcessSeries:
    """Mean excess ``(1/n_u) sum (x_i - u)`` with standard error ``sd/sqrt(n_u)``.

    Thresholds leaving fewer than 5 excesses are dropped.
    """
    x = as_array(sample)
    rows = []
    for u in thresholds:
        y = x[x > u] - u
        if y.size < MIN_MEAN_EXCESS_COUNT:
            continue
        rows.append((float(u), float(y.mean()), float(y.std(ddof=1) / math.sqrt(y.size)), y.size))
    if not rows:
        raise DataError("no threshold leaves enough excesses for a mean excess series")
    u, mean, se, n = (np.array(c) for c in zip(*rows))
    return MeanExcessSeries(u, mean, se, n.astype(int))


@dataclass(frozen=True)
class StabilitySeries:
    """Parameter estimates against threshold with normal-theory intervals."""

    u: np.ndarray
    estimate: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    n_excess: np.ndarray


@dataclass(frozen=True)
class StabilityResult:
    xi: StabilitySeries
    sigma_star: StabilitySeries
    skipped: tuple[tuple[float, str], ...] = ()


def stability_series(
    sample: Sample | np.ndarray,
    thresholds: Sequence[float],
    level: float = 0.95,
    min_excesses: int = MIN_EXCESSES,
) -> StabilityResult:
    """Fit a GPD at every threshold and track ``xi`` and ``sigma - u*xi``.

    Thresholds where the fit fails are left out and listed in ``skipped``
    with the reason.
    """
    x = as_array(sample)
    z = _z(level)
    xi_rows, ss_rows, skipped = [], [], []
    for u in thresholds:
        u = float(u)
        try:
            fit = fit_gpd(excesses_over(x, u), min_excesses=min_excesses)
        except (InsufficientDataError, ConvergenceError) as err:
            skipped.append((u, str(err)))
            continue
        ss, ss_se = sigma_star(fit)
        xi_rows.append((u, fit.xi, fit.xi - z * fit.se_xi, fit.xi + z * fit.se_xi, fit.exceed_count))
        ss_rows.append((u, ss, ss - z * ss_se, ss + z * ss_se, fit.exceed_count))
    if not xi_rows:
        raise DataError("no threshold in the grid could be fitted")

    def pack(rows):
        cols = [np.array(c) for c in zip(*rows)]
        return StabilitySeries(cols[0], cols[1], cols[2], cols[3], cols[4].astype(int))

    return StabilityResult(pack(xi_rows), pack(ss_rows), tuple(skipped))


@dataclass(frozen=True)
class ModelCheckPlots:
    """Probability plot ``(i/(k+1), H(y_(i)))`` and quantile plot in data units."""

    plotting_position: np.ndarray
    model_probability: np.ndarray
    model_quantile: np.ndarray
    empirical_quantile: np.ndarray


def probability_quantile_plots(fit: GpdFit, e: ExcessSet) -> ModelCheckPlots:
    """Both axes of the quantile plot include the threshold offset ``u``."""
    y = np.sort(e.excesses)
    k = y.size
    pos = np.arange(1, k + 1) / (k + 1.0)
    return ModelCheckPlots(
        plotting_position=pos,
        model_probability=np.asarray(gpd_cdf(fit.params, y)),
        model_quantile=e.threshold + np.asarray(gpd_quantile(fit.params, pos)),
        empirical_quantile=e.threshold + y,
    )


@dataclass(frozen=True)
class ReturnLevelSeries:
    m: np.ndarray
    level: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    se: np.ndarray


def return_level(fit: GpdFit, m) -> np.ndarray:
    """``u + (sigma/xi) [(m zeta_u)^xi - 1]``, the level exceeded once per ``m`` observations."""
    log_a = np.log(np.asarray(m, dtype=float) * fit.zeta_u)
    if abs(fit.xi) < XI_ZERO:
        return fit.threshold + fit.sigma * log_a
    return fit.threshold + fit.sigma * np.expm1(fit.xi * log_a) / fit.xi


def _return_level_gradient(fit: GpdFit, log_a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    xi, sigma = fit.xi, fit.sigma
    if abs(xi) < XI_ZERO:
        return 0.5 * sigma * log_a**2, log_a
    growth = np.expm1(xi * log_a)
    d_sigma = growth / xi
    d_xi = -sigma * growth / xi**2 + sigma * np.exp(xi * log_a) * log_a / xi
    return d_xi, d_sigma


def return_level_series(fit: GpdFit, m_values: Sequence[float], level: float = 0.95) -> ReturnLevelSeries:
    """Return levels with delta-method intervals over the ``(xi, sigma)`` covariance.

    Values of ``m`` with ``m * zeta_u < 1`` are dropped. Uncertainty in
    ``zeta_u`` is not propagated.
    """
    m = np.asarray(m_values, dtype=float)
    m = m[m * fit.zeta_u >= 1.0]
    log_a = np.log(m * fit.zeta_u)
    x_m = return_level(fit, m)
    g_xi, g_sigma = _return_level_gradient(fit, log_a)
    var = g_xi**2 * fit.se_xi**2 + 2 * g_xi * g_sigma * fit.cov_xi_sigma + g_sigma**2 * fit.se_sigma**2
    se = np.sqrt(np.maximum(var, 0.0))
    z = _z(level)
    return ReturnLevelSeries(m, x_m, x_m - z * se, x_m + z * se, se)


def default_return_periods(fit: GpdFit, count: int = 40) -> np.ndarray:
    """Log-spaced ``m`` from ``1/zeta_u`` up to 1000 times the sample size."""
    m0 = 1.0 / fit.zeta_u
    n_total = fit.exceed_count / fit.zeta_u
    return np.geomspace(m0, max(1000.0 * n_total, 10.0 * m0), count)


@dataclass(frozen=True)
class DensitySeries:
    bin_edges: np.ndarray
    hist_density: np.ndarray
    bin_centers: np.ndarray
    fitted_at_centers: np.ndarray
    curve_x: np.ndarray
    curve_pdf: np.ndarray


def density_series(fit: GpdFit, e: ExcessSet, bins: int = 30, curve_points: int = 200) -> DensitySeries:
    """Area-normalised histogram of excesses alongside the fitted GPD density."""
    if bins < 5:
        raise DomainError(f"density plot needs at least 5 bins, got {bins}")
    y = e.excesses
    hist, edges = np.histogram(y, bins=bins, range=(0.0, float(y.max())), density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    curve_x = np.linspace(0.0, float(y.max()), curve_points)
    return DensitySeries(
        bin_edges=edges,
        hist_density=hist,
        bin_centers=centers,
        fitted_at_centers=np.asarray(gpd_pdf(fit.params, centers)),
        curve_x=curve_x,
        curve_pdf=np.asarray(gpd_pdf(fit.params, curve_x)),
    )


@dataclass(frozen=True)
class DiagnosticsBundle:
    mean_excess: MeanExcessSeries | None = None
    stability: StabilityResult | None = None
    model_check: ModelCheckPlots | None = None
    return_levels: ReturnLevelSeries | None = None
    density: DensitySeries | None = None
    linearity: dict[str, LinearSummary] = field(default_factory=dict)


def threshold_diagnostics(
    sample: Sample | np.ndarray,
    thresholds: Sequence[float] | None = None,
    level: float = 0.95,
) -> DiagnosticsBundle:
    """Mean excess and parameter-stability series used to pick a search range."""
    if thresholds is None:
        thresholds = default_thresholds(sample)
    me = mean_excess_series(sample, thresholds)
    stab = stability_series(sample, thresholds, level=level)
    linearity = {
        "mean_excess": linear_summary(me.u, me.mean),
        "xi": linear_summary(stab.xi.u, stab.xi.estimate),
        "sigma_star": linear_summary(stab.sigma_star.u, stab.sigma_star.estimate),
    }
    return DiagnosticsBundle(mean_excess=me, stability=stab, linearity=linearity)


def model_check(
    fit: GpdFit,
    e: ExcessSet,
    m_values: Sequence[float] | None = None,
    level: float = 0.95,
    bins: int = 30,
) -> DiagnosticsBundle:
    """Probability, quantile, return level and density series for one fit."""
    pq = probability_quantile_plots(fit, e)
    if m_values is None:
        m_values = default_return_periods(fit)
    return DiagnosticsBundle(
        model_check=pq,
        return_levels=return_level_series(fit, m_values, level=level),
        density=density_series(fit, e, bins=bins),
        linearity={
            "probability_plot": linear_summary(pq.plotting_position, pq.model_probability),
            "quantile_plot": linear_summary(pq.model_quantile, pq.empirical_quantile),
        },
    )
