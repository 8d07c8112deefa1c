"""Automatic peaks-over-threshold threshold selection.

The threshold minimising the L1 distance between a boundary-corrected KDE and
the maximum-likelihood GPD density of the excesses is located by Bayesian
optimisation over a user-supplied range.
"""

__version__ = "0.1.0"

from .bayesopt import BoConfig, BoTrace, GpConfig, expected_improvement, gpr_fit, select_threshold
from .errors import PotError
from .fit import ExcessSet, GpdFit, excesses_over, fit_gpd, gpd_loglik, sigma_star
from .gpd import GpdParams, gpd_cdf, gpd_pdf, gpd_quantile, gpd_sample
from .kde import Grid, KdeModel, kde_boundary, kde_raw, silverman_bandwidth
from .sample import Sample
from .score import ScoreConfig, ScoreEvaluation, score
from .synth import GeneratorSpec, generate

__all__ = [
    "BoConfig",
    "BoTrace",
    "ExcessSet",
    "GeneratorSpec",
    "GpConfig",
    "GpdFit",
    "GpdParams",
    "Grid",
    "KdeModel",
    "PotError",
    "Sample",
    "ScoreConfig",
    "ScoreEvaluation",
    "excesses_over",
    "expected_improvement",
    "fit_gpd",
    "generate",
    "gpd_cdf",
    "gpd_loglik",
    "gpd_pdf",
    "gpd_quantile",
    "gpd_sample",
    "gpr_fit",
    "kde_boundary",
    "kde_raw",
    "score",
    "select_threshold",
    "sigma_star",
    "silverman_bandwidth",
]
