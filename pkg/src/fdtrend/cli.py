"""Command-line interface.

Exit status: 0 on success, 1 on invalid input or usage, 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings

from . import __version__
from .bands import pointwise_band, simultaneous_band
from .covariance import estimate_pointwise_variance
from .design import DesignGrid
from .errors import NumericalError, ReplicationError, ValidationError
from .estimators import EstimatorConfig, default_eval_grid, estimate_trend
from .io import band_header, read_sample, write_band, write_json, write_sample, write_sup_deviations, write_trend
from .kernels import KERNELS
from .simulation import (
    NoiseModel,
    coverage_experiment,
    make_model,
    normality_diagnostic,
    rate_check,
    simulate_sample,
)

log = logging.getLogger("fdtrend")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _estimator_args(p):
    p.add_argument("--method", choices=["clark", "loclin", "local_linear"], default="loclin")
    p.add_argument("--kernel", choices=sorted(KERNELS), default="epanechnikov")
    p.add_argument("--bandwidth", default="auto", help="positive number or 'auto'")
    p.add_argument("--eval-points", type=int, default=401)


def _model_args(p):
    p.add_argument("--model", default="ou", help="ou | brownian | brownian_bridge | squared_exponential | zero")
    p.add_argument("--mean", default="sin", choices=["zero", "sin", "quadratic"])
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--range", type=float, default=0.5, dest="range_")
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=0.25)
    p.add_argument("--noise", default="iid", help="iid | ar1:RHO")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--p", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fdtrend", description="Trend estimation and simultaneous bands for functional data.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", help="estimate the trend from a sample CSV")
    p.add_argument("sample")
    _estimator_args(p)
    p.add_argument("--out", default="-")

    p = sub.add_parser("band", help="confidence band from a sample CSV (CSV + JSON header)")
    p.add_argument("sample")
    _estimator_args(p)
    p.add_argument("--gamma", type=float, default=0.05)
    p.add_argument("--kind", choices=["simultaneous", "pointwise"], default="simultaneous")
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="write a synthetic sample CSV")
    _model_args(p)
    p.add_argument("--out", default="-")

    p = sub.add_parser("coverage", help="Monte Carlo coverage of the simultaneous band")
    _model_args(p)
    _estimator_args(p)
    p.add_argument("--gamma", type=float, default=0.10)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--dump-sup", default=None, help="CSV path for per-replication sup deviations")
    p.add_argument("--out", default="-")

    p = sub.add_parser("rate-check", help="variance of the estimate at fixed n across grid sizes")
    _model_args(p)
    _estimator_args(p)
    p.add_argument("--p-list", default="50,100,200,400")
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="-")

    p = sub.add_parser("normality", help="distribution of the scaled estimation error at t0")
    _model_args(p)
    _estimator_args(p)
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="-")
    return parser


def _config(args) -> EstimatorConfig:
    return EstimatorConfig(args.method, args.kernel, args.bandwidth)


def _model(args):
    return make_model(args.model, args.mean, args.scale, args.range_, args.horizon)


def _noise(args):
    return NoiseModel.parse(args.noise, args.sigma)


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _load(path):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sample = read_sample(path)
    for w in caught:
        log.warning("%s", w.message)
    return sample


def cmd_estimate(args):
    sample = _load(args.sample)
    trend = estimate_trend(sample, _config(args), default_eval_grid(sample.horizon, args.eval_points))
    _emit(write_trend(trend), args.out)


def cmd_band(args):
    sample = _load(args.sample)
    cfg = _config(args).resolve(sample.n, sample.horizon)
    t = default_eval_grid(sample.horizon, args.eval_points)
    trend = estimate_trend(sample, cfg, t)
    var = estimate_pointwise_variance(sample, cfg, t)
    build = simultaneous_band if args.kind == "simultaneous" else pointwise_band
    band = build(trend, var, args.gamma)
    header = band_header(band, trend, horizon=sample.horizon, noise_variance=var.noise_variance)
    write_band(band, args.out, header)


def cmd_simulate(args):
    model = _model(args)
    grid = DesignGrid.regular(args.p, model.horizon)
    sample = simulate_sample(model, _noise(args), grid, args.n, args.seed)
    comments = [f"model={args.model} mean={args.mean} sigma={args.sigma} noise={args.noise} seed={args.seed}"]
    _emit(write_sample(sample, None, comments), args.out)


def cmd_coverage(args):
    report = coverage_experiment(
        _model(args), _noise(args), args.n, args.p, _config(args), args.gamma, args.reps, args.seed,
        eval_points=args.eval_points, n_jobs=args.jobs,
    )
    if args.dump_sup:
        write_sup_deviations(report.sup_deviations, args.dump_sup)
    _emit(write_json(report.as_dict()), args.out)


def cmd_rate_check(args):
    model = _model(args)
    try:
        p_list = [int(x) for x in args.p_list.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"invalid --p-list {args.p_list!r}") from None
    t0 = model.horizon / 2 if args.t0 is None else args.t0
    report = rate_check(model, _noise(args), args.n, p_list, _config(args), t0, args.reps, args.seed, n_jobs=args.jobs)
    _emit(write_json(report.as_dict()), args.out)


def cmd_normality(args):
    model = _model(args)
    t0 = model.horizon / 2 if args.t0 is None else args.t0
    report = normality_diagnostic(model, _noise(args), args.n, args.p, _config(args), t0, args.reps, args.seed, n_jobs=args.jobs)
    _emit(write_json(report.as_dict()), args.out)


COMMANDS = {
    "estimate": cmd_estimate,
    "band": cmd_band,
    "simulate": cmd_simulate,
    "coverage": cmd_coverage,
    "rate-check": cmd_rate_check,
    "normality": cmd_normality,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except ReplicationError as exc:
        log.error("%s", exc)
        return 2 if isinstance(exc.cause, NumericalError) else 1
    except NumericalError as exc:
        log.error("%s", exc)
        return 2
    except (ValidationError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
