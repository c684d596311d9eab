"""Command-line entry point: ``icvcdf {fit,predict,evaluate,experiment}``.

Exit codes: 0 success, 2 unreadable or malformed input, 3 data violating an
estimator precondition, 4 probability level outside (0, 1).
"""

import argparse
import json
import os
import sys
from importlib import resources

from icvcdf.distributions import SETTINGS, get_setting
from icvcdf.ensembles import EnsembleConfig, ensemble_fit
from icvcdf.estimators import GridSpec, fit, group_xy
from icvcdf.harness import ConfigError, ExperimentConfig, run_experiment
from icvcdf.io import ParseError, read_dataset, read_grid, read_model, write_model, write_text_atomic
from icvcdf.metrics import evaluate_cdf, metric_names

EXIT_INPUT = 2
EXIT_INVARIANT = 3
EXIT_LEVEL = 4


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _grid_spec(text):
    if text == "observed":
        return GridSpec.observed()
    if text == "integer":
        return GridSpec.integer()
    if text.startswith("file:"):
        try:
            return GridSpec.explicit(read_grid(text[5:]))
        except OSError as exc:
            raise CliError(f"cannot read grid file: {exc}", EXIT_INPUT) from None
    raise CliError(f"--grid must be observed, integer or file:PATH, got {text!r}", EXIT_INPUT)


def _check_level(gamma):
    if not 0.0 < gamma < 1.0:
        raise CliError(f"gamma must lie in (0, 1), got {gamma!r}", EXIT_LEVEL)


def cmd_fit(args):
    grid = _grid_spec(args.grid)
    try:
        x, y = read_dataset(args.input)
    except OSError as exc:
        raise CliError(f"cannot read dataset: {exc}", EXIT_INPUT) from None
    try:
        if args.subag:
            config = EnsembleConfig(n_subsamples=args.subag, fraction=args.frac, seed=args.seed)
            model = ensemble_fit(x, y, args.order, grid, config)
        else:
            model = fit(group_xy(x, y), args.order, grid)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INVARIANT) from None
    write_model(model, args.output)
    print(f"fit {args.order}: n={x.size} d={model.design_points.size} grid={model.grid.size}",
          file=sys.stderr)


def cmd_predict(args):
    if args.gamma is not None:
        _check_level(args.gamma)
    model = read_model(args.model)
    if args.gamma is not None:
        value = model.predict_quantile(args.x, args.gamma)
    else:
        value = model.predict_cdf(args.x, args.y)
    print(f"{value:.12g}")


def cmd_evaluate(args):
    for g in args.gamma:
        _check_level(g)
    model = read_model(args.model)
    setting = get_setting(args.setting)
    names = metric_names(args.gamma)
    lines = ["x," + ",".join(names)]
    for xv in args.x:
        try:
            values = evaluate_cdf(model.cdf_at(xv), setting, xv, args.gamma)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_INPUT) from None
        lines.append(",".join([repr(float(xv))] + [repr(float(v)) for v in values]))
    text = "\n".join(lines) + "\n"
    if args.out:
        write_text_atomic(args.out, text)
    sys.stdout.write(text)


def bundled_configs():
    return sorted(p.name for p in resources.files("icvcdf").joinpath("configs").iterdir()
                  if p.name.endswith(".json"))


def load_config(ref):
    """Experiment config from a path, or by name from the bundled set."""
    if os.path.exists(ref):
        source = open(ref).read
    else:
        name = ref if ref.endswith(".json") else ref + ".json"
        if name not in bundled_configs():
            raise CliError(f"no config file or bundled config named {ref!r}", EXIT_INPUT)
        source = resources.files("icvcdf").joinpath("configs", name).read_text
    try:
        data = json.loads(source())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config: {exc}", EXIT_INPUT) from None
    try:
        return ExperimentConfig.from_dict(data)
    except ConfigError as exc:
        raise CliError(f"invalid config: {exc}", EXIT_INPUT) from None


def cmd_experiment(args):
    cfg = load_config(args.config)
    if args.reps_override is not None:
        if args.reps_override < 1:
            raise CliError("--reps-override must be positive", EXIT_INPUT)
        cfg.replications = args.reps_override
    if args.seed is not None:
        cfg.seed = args.seed
    report = run_experiment(cfg, n_jobs=args.jobs)
    os.makedirs(args.out, exist_ok=True)
    write_text_atomic(os.path.join(args.out, "report.json"), report.to_json() + "\n")
    write_text_atomic(os.path.join(args.out, "report.csv"), report.to_csv())
    print(report.table())


def build_parser():
    parser = argparse.ArgumentParser(
        prog="icvcdf", description="Conditional CDFs under icv/icx stochastic order constraints.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model from an x,y CSV file")
    p.add_argument("--input", required=True)
    p.add_argument("--order", required=True, choices=["icv", "icx", "fsd", "ecdf"])
    p.add_argument("--grid", default="observed", help="observed, integer or file:PATH")
    p.add_argument("--subag", type=int, default=0, metavar="N", help="number of subsamples")
    p.add_argument("--frac", type=float, default=0.5, help="subsample fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="CDF value or quantile from a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--x", type=float, required=True)
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--y", type=float)
    target.add_argument("--gamma", type=float)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="errors of a fitted model against a simulation setting")
    p.add_argument("--model", required=True)
    p.add_argument("--setting", required=True, choices=sorted(SETTINGS))
    p.add_argument("--x", type=float, nargs="+", required=True)
    p.add_argument("--gamma", type=float, nargs="+", default=[0.1, 0.5, 0.9])
    p.add_argument("--out", help="also write the CSV here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="run a Monte Carlo comparison")
    p.add_argument("--config", required=True, help="JSON path or bundled config name")
    p.add_argument("--out", required=True, help="directory for report.json and report.csv")
    p.add_argument("--reps-override", type=int, dest="reps_override")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        print(f"icvcdf: error: {exc}", file=sys.stderr)
        return exc.code
    except ParseError as exc:
        print(f"icvcdf: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
