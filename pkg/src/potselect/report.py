"""Fit reports and plot-series files.

Reports are JSON; plot series are CSV with floats written to 17 significant
digits. Non-finite floats are written as ``null`` in JSON and read back as
``inf`` (scores) or ``nan`` (standard errors), so a report survives a
write/read cycle unchanged.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import __version__
from .bayesopt import BoTrace
from .diagnostics import DiagnosticsBundle
from .fit import GpdFit
from .score import ScoreEvaluation

TRACE_COLUMNS = ("iter", "u", "score", "xi", "sigma", "n_excess")


def fmt(x: Any) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def _finite_or_none(x: float | None) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return float(x)


@dataclass(frozen=True)
class TraceRow:
    iter: int
    u: float
    score: float
    xi: float | None = None
    sigma: float | None = None
    n_excess: int = 0
    error: str | None = None

    @classmethod
    def from_evaluation(cls, i: int, ev: ScoreEvaluation) -> "TraceRow":
        return cls(
            iter=i,
            u=ev.threshold,
            score=ev.score,
            xi=ev.fit.xi if ev.fit else None,
            sigma=ev.fit.sigma if ev.fit else None,
            n_excess=ev.exceed_count,
            error=ev.error,
        )

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d["score"] = _finite_or_none(self.score)
        return d

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "TraceRow":
        d = dict(d)
        d["score"] = math.inf if d.get("score") is None else float(d["score"])
        return cls(**d)


def trace_rows(trace: BoTrace) -> list[TraceRow]:
    return [TraceRow.from_evaluation(i, ev) for i, ev in enumerate(trace.evaluations)]


@dataclass(frozen=True)
class FitReport:
    """Outcome of ``select`` (with a trace) or ``fit`` (trace empty)."""

    threshold: float
    xi: float
    sigma: float
    se_xi: float
    se_sigma: float
    cov_xi_sigma: float
    sigma_star: float
    exceed_count: int
    total_count: int
    zeta_u: float
    log_likelihood: float
    score: float | None
    search_range: tuple[float, float] | None = None
    trace: tuple[TraceRow, ...] = ()
    config: dict[str, Any] = field(default_factory=dict)
    version: str = __version__

    @classmethod
    def from_fit(
        cls,
        fit: GpdFit,
        total_count: int,
        score: float | None = None,
        trace: BoTrace | None = None,
        config: dict[str, Any] | None = None,
    ) -> "FitReport":
        return cls(
            threshold=fit.threshold,
            xi=fit.xi,
            sigma=fit.sigma,
            se_xi=fit.se_xi,
            se_sigma=fit.se_sigma,
            cov_xi_sigma=fit.cov_xi_sigma,
            sigma_star=fit.sigma - fit.threshold * fit.xi,
            exceed_count=fit.exceed_count,
            total_count=total_count,
            zeta_u=fit.zeta_u,
            log_likelihood=fit.log_likelihood,
            score=score,
            search_range=(trace.search_lo, trace.search_hi) if trace else None,
            trace=tuple(trace_rows(trace)) if trace else (),
            config=dict(config or {}),
        )

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "trace":
                v = [row.to_json() for row in v]
            elif f.name == "search_range":
                v = list(v) if v is not None else None
            elif isinstance(v, float):
                v = _finite_or_none(v)
            d[f.name] = v
        return d

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "FitReport":
        d = dict(d)
        d["trace"] = tuple(TraceRow.from_json(r) for r in d.get("trace", ()))
        if d.get("search_range") is not None:
            d["search_range"] = tuple(d["search_range"])
        for name in ("se_xi", "se_sigma", "cov_xi_sigma"):
            if d.get(name) is None:
                d[name] = math.nan
        return cls(**d)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def loads(cls, text: str) -> "FitReport":
        return cls.from_json(json.loads(text))


def write_trace(path: Path, trace: BoTrace) -> Path:
    rows = ((r.iter, r.u, r.score, "" if r.xi is None else r.xi, "" if r.sigma is None else r.sigma, r.n_excess)
            for r in trace_rows(trace))
    return write_csv(path, TRACE_COLUMNS, rows)


def write_threshold_diagnostics(out: Path, bundle: DiagnosticsBundle) -> dict[str, str]:
    """mean_excess.csv, stability.csv and linearity.csv."""
    files = {}
    me = bundle.mean_excess
    files["mean_excess"] = write_csv(
        out / "mean_excess.csv", ("u", "mean_excess", "se", "n_excess"), zip(me.u, me.mean, me.se, me.n_excess)
    ).name
    xi, ss = bundle.stability.xi, bundle.stability.sigma_star
    files["stability"] = write_csv(
        out / "stability.csv",
        ("u", "xi", "xi_ci_lo", "xi_ci_hi", "sigma_star", "sigma_star_ci_lo", "sigma_star_ci_hi", "n_excess"),
        zip(xi.u, xi.estimate, xi.ci_lo, xi.ci_hi, ss.estimate, ss.ci_lo, ss.ci_hi, xi.n_excess),
    ).name
    files["linearity"] = write_csv(
        out / "linearity.csv",
        ("series", "slope", "intercept", "r2", "n"),
        ((k, s.slope, s.intercept, s.r2, s.n) for k, s in bundle.linearity.items()),
    ).name
    return files


def write_model_check(out: Path, bundle: DiagnosticsBundle) -> dict[str, str]:
    """prob_plot.csv, qq_plot.csv, return_level.csv, density.csv, density_curve.csv."""
    files = {}
    pq = bundle.model_check
    files["prob_plot"] = write_csv(
        out / "prob_plot.csv", ("empirical", "model"), zip(pq.plotting_position, pq.model_probability)
    ).name
    files["qq_plot"] = write_csv(
        out / "qq_plot.csv", ("model", "empirical"), zip(pq.model_quantile, pq.empirical_quantile)
    ).name
    rl = bundle.return_levels
    files["return_level"] = write_csv(
        out / "return_level.csv", ("m", "return_level", "ci_lo", "ci_hi", "se"), zip(rl.m, rl.level, rl.ci_lo, rl.ci_hi, rl.se)
    ).name
    d = bundle.density
    files["density"] = write_csv(
        out / "density.csv",
        ("bin_lo", "bin_hi", "bin_center", "hist_density", "fitted_density"),
        zip(d.bin_edges[:-1], d.bin_edges[1:], d.bin_centers, d.hist_density, d.fitted_at_centers),
    ).name
    files["density_curve"] = write_csv(out / "density_curve.csv", ("y", "fitted_density"), zip(d.curve_x, d.curve_pdf)).name
    return files


def write_json(path: Path, obj: Any) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    return path
