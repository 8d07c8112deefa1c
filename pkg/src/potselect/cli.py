"""Command-line front end.

Commands: ``synth``, ``diagnose``, ``select`` and ``fit``. Exit codes are
0 on success, 1 for usage or configuration problems, 2 for bad or missing
data and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .bayesopt import BoConfig, select_threshold
from .diagnostics import default_thresholds, model_check, threshold_diagnostics
from .errors import DataError, DomainError, NumericalError, SelectionFailedError
from .fit import excesses_over, fit_gpd
from .ingest import ingest
from .report import FitReport, write_json, write_model_check, write_threshold_diagnostics, write_trace
from .sample import Sample
from .score import ScoreConfig, score_excesses
from .synth import GeneratorSpec, generate, parse_family

logger = logging.getLogger("potselect")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"range needs LO < HI, got {text!r}")
    return lo, hi


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _level(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"CI level must be in (0, 1), got {text}")
    return v


def _add_input(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--input", type=Path, help="data file (one value per line, or CSV with header)")
    g.add_argument("--generate", metavar="SPEC", help="synthetic input, e.g. 'gaussian(0,1)'")
    p.add_argument("--column", help="CSV value column, by name or 0-based index")
    p.add_argument("--length", type=_positive_int, default=10000, help="length of generated input")
    p.add_argument("--data-seed", type=int, help="seed for generated input (default: --seed)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="potselect", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic series, one value per line")
    p.add_argument("family", help="gaussian(mean,sd) | gamma(shape,scale[,shift]) | ar1(phi,noise_sd)")
    p.add_argument("--length", type=_positive_int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="output file")

    p = sub.add_parser("diagnose", help="mean excess and parameter stability series")
    _add_input(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--range", type=_range, help="threshold span LO,HI (default: 50th-99th percentile)")
    p.add_argument("--grid", type=_positive_int, default=50, help="number of thresholds")
    p.add_argument("--ci", type=_level, default=0.95)
    p.add_argument("--out", type=Path, required=True, help="output directory")

    for name, helptext in (("select", "choose the threshold by Bayesian optimisation"),
                           ("fit", "fit the GPD at a fixed threshold")):
        p = sub.add_parser(name, help=helptext)
        _add_input(p)
        if name == "select":
            p.add_argument("--range", type=_range, required=True, help="search range LO,HI")
            p.add_argument("--bo-init", type=_positive_int, default=5)
            p.add_argument("--bo-iters", type=int, default=25)
        else:
            p.add_argument("--threshold", "-u", type=float, required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--grid", type=int, default=2048, help="score grid points")
        p.add_argument("--scale", type=float, default=1.0, help="score constant C")
        p.add_argument("--bins", type=int, default=30, help="density histogram bins")
        p.add_argument("--ci", type=_level, default=0.95)
        p.add_argument("--out", type=Path, required=True, help="output directory")
    return parser


def _load(args) -> Sample:
    if args.generate:
        seed = args.data_seed if args.data_seed is not None else args.seed
        return generate(_generator_spec(args.generate, args.length, seed))
    if not args.input.is_file():
        raise DataError(f"input file not found: {args.input}")
    column: Any = args.column
    return ingest(args.input, column=column)


def _outdir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise UsageError(f"cannot create output directory {path}: {err.strerror}") from None
    if not os.access(path, os.W_OK):
        raise UsageError(f"output directory {path} is not writable")
    return path


def _config_echo(args) -> dict[str, Any]:
    skip = {"func", "verbose", "out"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, Path):
            v = str(v)
        elif isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def _generator_spec(text: str, length: int, seed: int) -> GeneratorSpec:
    try:
        family, params = parse_family(text)
        return GeneratorSpec(family, params, length, seed)
    except DomainError as err:
        raise UsageError(str(err)) from None


def cmd_synth(args) -> int:
    sample = generate(_generator_spec(args.family, args.length, args.seed))
    if args.out.parent and not args.out.parent.exists():
        raise UsageError(f"directory {args.out.parent} does not exist")
    try:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.writelines(f"{v!r}\n" for v in sample.values.tolist())
    except OSError as err:
        raise UsageError(f"cannot write {args.out}: {err.strerror}") from None
    logger.info("wrote %d values of %s to %s", len(sample), sample.source, args.out)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    sample = _load(args)
    out = _outdir(args.out)
    if args.range:
        thresholds = np.linspace(args.range[0], args.range[1], args.grid)
    else:
        thresholds = default_thresholds(sample, args.grid)
    bundle = threshold_diagnostics(sample, thresholds, level=args.ci)
    files = write_threshold_diagnostics(out, bundle)
    index = {
        "command": "diagnose",
        "version": __version__,
        "n_observations": len(sample),
        "files": files,
        "linearity": {k: asdict(v) for k, v in bundle.linearity.items()},
        "skipped_thresholds": [{"u": u, "reason": r} for u, r in bundle.stability.skipped],
        "config": _config_echo(args),
    }
    write_json(out / "index.json", _jsonable(index))
    return EXIT_OK


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if np.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _score_config(args) -> ScoreConfig:
    if args.grid < 64:
        raise UsageError("--grid must be at least 64")
    if not args.scale > 0:
        raise UsageError("--scale must be positive")
    if args.bins < 5:
        raise UsageError("--bins must be at least 5")
    return ScoreConfig(grid_points=args.grid, scale=args.scale)


def _write_fit_outputs(out: Path, report: FitReport, fit, excess_set, args, extra: dict[str, str]) -> None:
    (out / "report.json").write_text(report.dumps(), encoding="utf-8")
    files = {"report": "report.json", **extra}
    files.update(write_model_check(out, model_check(fit, excess_set, level=args.ci, bins=args.bins)))
    write_json(out / "index.json", {"command": args.command, "version": __version__, "files": files})


def cmd_select(args) -> int:
    sample = _load(args)
    out = _outdir(args.out)
    if args.bo_iters < 0:
        raise UsageError("--bo-iters must be >= 0")
    cfg = BoConfig(n_init=args.bo_init, n_iter=args.bo_iters, seed=args.seed, score=_score_config(args))
    lo, hi = args.range
    try:
        trace = select_threshold(sample, lo, hi, cfg)
    except SelectionFailedError as err:
        if err.trace is not None:
            write_trace(out / "trace.csv", err.trace)
            for ev in err.trace.evaluations:
                print(f"  u={ev.threshold:.6g} score={ev.score:.6g} {ev.error or ''}", file=sys.stderr)
        raise
    best = trace.best
    excess_set = excesses_over(sample, best.threshold)
    report = FitReport.from_fit(best.fit, len(sample), score=best.score, trace=trace, config=_config_echo(args))
    write_trace(out / "trace.csv", trace)
    _write_fit_outputs(out, report, best.fit, excess_set, args, {"trace": "trace.csv"})
    print(f"u={best.threshold:.6g} xi={best.fit.xi:.6g} sigma={best.fit.sigma:.6g} "
          f"n_excess={best.exceed_count} score={best.score:.6g}")
    return EXIT_OK


def cmd_fit(args) -> int:
    sample = _load(args)
    out = _outdir(args.out)
    excess_set = excesses_over(sample, args.threshold)
    ev = score_excesses(excess_set, _score_config(args))
    report = FitReport.from_fit(ev.fit, len(sample), score=ev.score, config=_config_echo(args))
    _write_fit_outputs(out, report, ev.fit, excess_set, args, {})
    print(f"u={args.threshold:.6g} xi={ev.fit.xi:.6g} sigma={ev.fit.sigma:.6g} "
          f"n_excess={ev.exceed_count} score={ev.score:.6g}")
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "diagnose": cmd_diagnose, "select": cmd_select, "fit": cmd_fit}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as err:
        print(f"potselect: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as err:
        print(f"potselect: data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as err:
        print(f"potselect: numerical error: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as err:
        print(f"potselect: I/O error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
