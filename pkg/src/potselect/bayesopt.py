"""One-dimensional Bayesian optimisation of the threshold score.

A zero-mean Gaussian process with a squared-exponential kernel is fitted to
the successful ``(u, Score(u))`` pairs; the next threshold maximises expected
improvement (for minimisation) over a dense candidate grid.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.special import ndtr

from .errors import (
    ConvergenceError,
    DomainError,
    DuplicatePointError,
    InsufficientDataError,
    NumericalError,
    SelectionFailedError,
)
from .fit import MIN_EXCESSES
from .sample import Sample, as_array
from .score import ScoreConfig, ScoreEvaluation, score

logger = logging.getLogger(__name__)

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
JITTER_LADDER = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4)


@dataclass(frozen=True)
class GpConfig:
    lengthscales: tuple[float, ...] = (0.05, 0.1, 0.2, 0.4, 0.8)
    noise_variance: float = 1e-6
    min_separation: float = 1e-9


@dataclass(frozen=True)
class GpPosterior:
    """Fitted GP in standardised coordinates; :meth:`predict` works in data units."""

    train_x: np.ndarray
    train_y: np.ndarray
    kernel_lengthscale: float
    kernel_variance: float
    noise_variance: float
    cholesky_factor: np.ndarray
    x_lo: float
    x_span: float
    y_mean: float
    y_scale: float
    log_marginal_likelihood: float
    alpha: np.ndarray = field(repr=False)

    def _kernel(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        d = a[:, None] - b[None, :]
        return self.kernel_variance * np.exp(-0.5 * (d / self.kernel_lengthscale) ** 2)

    def _standardise(self, x) -> np.ndarray:
        return (np.atleast_1d(np.asarray(x, dtype=float)) - self.x_lo) / self.x_span

    def predict(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and standard deviation of the latent function at ``x``."""
        xs = self._standardise(x)
        xt = self._standardise(self.train_x)
        k_star = self._kernel(xs, xt)
        mean = k_star @ self.alpha
        v = solve_triangular(self.cholesky_factor, k_star.T, lower=True)
        var = self.kernel_variance - np.einsum("ij,ij->j", v, v)
        sd = np.sqrt(np.maximum(var, 0.0))
        return self.y_mean + self.y_scale * mean, self.y_scale * sd


def _cholesky_with_jitter(k: np.ndarray) -> tuple[np.ndarray, float]:
    for jitter in JITTER_LADDER:
        try:
            return np.linalg.cholesky(k + jitter * np.eye(k.shape[0])), jitter
        except np.linalg.LinAlgError:
            continue
    raise NumericalError("kernel matrix not positive definite after jitter ladder")


def gpr_fit(
    xs: Sequence[float],
    ys: Sequence[float],
    cfg: GpConfig = GpConfig(),
    bounds: tuple[float, float] | None = None,
) -> GpPosterior:
    """Fit the GP surrogate; the lengthscale is picked by log marginal likelihood.

    Inputs are mapped to ``[0, 1]`` using ``bounds`` (default: the span of
    ``xs``) and outputs are standardised, so the kernel variance is 1.
    """
    x = np.asarray(xs, dtype=float).ravel()
    y = np.asarray(ys, dtype=float).ravel()
    if x.size != y.size:
        raise DomainError("xs and ys differ in length")
    if x.size < 2:
        raise DomainError("GP regression needs at least two points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("GP training data must be finite")
    xsorted = np.sort(x)
    if np.min(np.diff(xsorted)) <= cfg.min_separation:
        raise DuplicatePointError("GP training inputs must be distinct")

    lo, hi = bounds if bounds is not None else (xsorted[0], xsorted[-1])
    span = hi - lo
    if not span > 0:
        raise DomainError("degenerate input bounds")
    xn = (x - lo) / span
    y_mean = float(y.mean())
    y_sd = float(y.std())
    y_scale = y_sd if y_sd > 0 else 1.0
    yn = (y - y_mean) / y_scale

    n = x.size
    d2 = (xn[:, None] - xn[None, :]) ** 2
    best = None
    for ell in cfg.lengthscales:
        k = np.exp(-0.5 * d2 / ell**2) + cfg.noise_variance * np.eye(n)
        try:
            chol, _ = _cholesky_with_jitter(k)
        except NumericalError:
            continue
        alpha = cho_solve((chol, True), yn)
        lml = -0.5 * float(yn @ alpha) - float(np.log(np.diag(chol)).sum()) - 0.5 * n * math.log(2 * math.pi)
        # strict comparison keeps the shortest lengthscale on ties
        if best is None or lml > best[0]:
            best = (lml, ell, chol, alpha)
    if best is None:
        raise NumericalError("no candidate lengthscale yields a positive definite kernel")
    lml, ell, chol, alpha = best
    return GpPosterior(
        train_x=x,
        train_y=y,
        kernel_lengthscale=ell,
        kernel_variance=1.0,
        noise_variance=cfg.noise_variance,
        cholesky_factor=chol,
        x_lo=float(lo),
        x_span=float(span),
        y_mean=y_mean,
        y_scale=y_scale,
        log_marginal_likelihood=lml,
        alpha=alpha,
    )


def ei_from_moments(mu, sd, f_best: float):
    """Closed-form expected improvement ``E[max(f_best - Y, 0)]``, ``Y ~ N(mu, sd^2)``."""
    mu = np.asarray(mu, dtype=float)
    sd = np.asarray(sd, dtype=float)
    gap = f_best - mu
    safe = np.where(sd > 0, sd, 1.0)
    z = gap / safe
    ei = gap * ndtr(z) + safe * _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    ei = np.where(sd > 0, ei, np.maximum(gap, 0.0))
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


def expected_improvement(post: GpPosterior, x, f_best: float):
    mu, sd = post.predict(x)
    out = ei_from_moments(mu, sd, f_best)
    return float(np.atleast_1d(out)[0]) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class BoConfig:
    n_init: int = 5
    n_iter: int = 25
    n_candidates: int = 512
    seed: int | None = 0
    gp: GpConfig = GpConfig()
    score: ScoreConfig = ScoreConfig()

    def __post_init__(self) -> None:
        if self.n_init < 1 or self.n_iter < 0 or self.n_candidates < 2:
            raise DomainError(f"invalid BO configuration: {self}")


@dataclass(frozen=True)
class BoTrace:
    evaluations: tuple[ScoreEvaluation, ...]
    search_lo: float
    search_hi: float
    best: ScoreEvaluation | None

    @property
    def thresholds(self) -> np.ndarray:
        return np.array([e.threshold for e in self.evaluations])

    @property
    def scores(self) -> np.ndarray:
        return np.array([e.score for e in self.evaluations])


def initial_design(lo: float, hi: float, k: int, seed: int | None) -> np.ndarray:
    """Stratified design: one point per equal-width cell of ``[lo, hi]``.

    Without a seed every point sits at its cell centre (a uniform grid);
    with a seed each point is jittered uniformly within its own cell.
    """
    width = (hi - lo) / k
    offsets = np.full(k, 0.5)
    if seed is not None:
        offsets = np.random.default_rng(seed).random(k)
    return lo + (np.arange(k) + offsets) * width


def _best(evals: Sequence[ScoreEvaluation]) -> ScoreEvaluation | None:
    ok = [e for e in evals if e.ok and np.isfinite(e.score)]
    if not ok:
        return None
    # ties broken towards the smaller threshold
    return min(ok, key=lambda e: (e.score, e.threshold))


Objective = Callable[[float], ScoreEvaluation]


def _safe_eval(objective: Objective, u: float) -> tuple[ScoreEvaluation, bool]:
    """Evaluate, converting expected failures into sentinel records.

    The flag is True when the failure was a lack of data, which rules out
    every larger threshold as well.
    """
    try:
        return objective(u), False
    except InsufficientDataError as err:
        return ScoreEvaluation(u, math.inf, None, err.count, error=f"insufficient data: {err}"), True
    except ConvergenceError as err:
        return ScoreEvaluation(u, math.inf, None, 0, error=f"non-convergence: {err}"), False


def minimize_1d(
    objective: Objective,
    lo: float,
    hi: float,
    cfg: BoConfig = BoConfig(),
    feasible_below: float = math.inf,
) -> BoTrace:
    """Run the initial design followed by ``cfg.n_iter`` EI-guided evaluations.

    ``feasible_below`` is an optional known bound above which the objective
    cannot succeed; EI proposals stay strictly below it.
    """
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise DomainError(f"search range needs lo < hi, got ({lo}, {hi})")
    evals: list[ScoreEvaluation] = []
    ceiling = math.inf  # thresholds at or above this are known to lack data

    for u in initial_design(lo, hi, cfg.n_init, cfg.seed):
        if u >= ceiling:
            evals.append(ScoreEvaluation(float(u), math.inf, None, 0, error="insufficient data: above a failed threshold"))
            continue
        ev, no_data = _safe_eval(objective, float(u))
        evals.append(ev)
        if no_data:
            ceiling = min(ceiling, float(u))

    # cell midpoints, so no proposal sits on the range boundary
    candidates = lo + (np.arange(cfg.n_candidates) + 0.5) * ((hi - lo) / cfg.n_candidates)
    sep = cfg.gp.min_separation * max(1.0, hi - lo)
    for it in range(cfg.n_iter):
        tried = np.array([e.threshold for e in evals])
        free = (candidates < ceiling) & (candidates < feasible_below)
        free &= np.min(np.abs(candidates[:, None] - tried[None, :]), axis=1) > sep
        if not free.any():
            logger.debug("candidate grid exhausted after %d iterations", it)
            break
        pool = candidates[free]
        ok = [e for e in evals if e.ok]
        if len(ok) < 2:
            # no surrogate yet; lower thresholds keep more data
            u_next = float(pool[0])
        else:
            post = gpr_fit([e.threshold for e in ok], [e.score for e in ok], cfg.gp, bounds=(lo, hi))
            f_best = min(e.score for e in ok)
            ei = expected_improvement(post, pool, f_best)
            u_next = float(pool[int(np.argmax(ei))])
        ev, no_data = _safe_eval(objective, u_next)
        evals.append(ev)
        if no_data:
            ceiling = min(ceiling, u_next)

    trace = BoTrace(tuple(evals), float(lo), float(hi), _best(evals))
    if sum(e.ok for e in evals) < 2:
        raise SelectionFailedError(
            f"only {sum(e.ok for e in evals)} successful score evaluations in [{lo}, {hi}]",
            trace=trace,
        )
    return trace


def select_threshold(
    sample: Sample | np.ndarray,
    lo: float,
    hi: float,
    cfg: BoConfig = BoConfig(),
) -> BoTrace:
    """Choose the POT threshold in ``[lo, hi]`` minimising the KDE/GPD score.

    Thresholds that cannot be scored (too few excesses, non-convergent fit)
    stay in the trace with an infinite score and are left out of the
    surrogate. ``trace.best`` is the exact argmin over all evaluations.

    Raises:
        SelectionFailedError: fewer than two thresholds could be scored; the
            partial trace is attached as ``err.trace``.
    """
    x = as_array(sample)
    k = cfg.score.min_excesses
    # u keeps at least k excesses exactly when u is below the k-th largest value
    feasible_below = float(np.sort(x)[-k]) if x.size >= k else -math.inf
    if feasible_below <= hi:
        logger.warning("thresholds at or above %g leave fewer than %d excesses", feasible_below, k)
    return minimize_1d(lambda u: score(x, u, cfg.score), lo, hi, cfg, feasible_below=feasible_below)
