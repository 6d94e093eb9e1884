"""Command-line entry point: ``isocone <subcommand> ...``.

Vectors are read and written as one-value-per-line CSV, structures as JSON.
Exit status is 0 on success, 2 for usage errors and 1 for anything that goes
wrong afterwards (the error is written to stderr as JSON).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import _rng
from .estimators import Sample, empirical_pmf, regression_means
from .experiment_harness import (
    ExperimentConfig,
    default_workers,
    run_experiment,
    write_matrix_csv,
)
from .io import format_float, load_preorder, read_indices, read_pairs, read_vector, vector_csv
from .isotone_solver import ConvergenceError, antitonic_regression, isotonic_regression
from .level_structure import level_partition, truncated_level_partition
from .limit_law import PmfScenario, RegressionScenario, limit_check


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_solve(args) -> None:
    p = load_preorder(args.preorder)
    values = read_vector(args.values)
    weights = read_vector(args.weights) if args.weights else None
    solve = antitonic_regression if args.antitonic else isotonic_regression
    fit = solve(p, values, weights)
    _emit(vector_csv(fit.fitted), args.out)
    if args.diagnostics:
        diag = dict(fit.diagnostics, objective=fit.objective,
                    blocks=[b.tolist() for b in fit.blocks])
        Path(args.diagnostics).write_text(_json(diag))


def cmd_partition(args) -> None:
    p = load_preorder(args.preorder)
    g0 = read_vector(args.reference)
    if args.truncate is not None:
        lp = truncated_level_partition(p, g0, args.truncate)
    else:
        lp = level_partition(p, g0)
    data = lp.to_dict()
    if data["epsilon_tilde"] == float("inf"):
        data["epsilon_tilde"] = "inf"
    _emit(_json(data), args.out)


def _two_column(header, *cols) -> str:
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(format_float(x) for x in row))
    return "\n".join(lines) + "\n"


def cmd_fit_pmf(args) -> None:
    p = load_preorder(args.preorder)
    est = empirical_pmf(p, Sample.pmf_draws(read_indices(args.draws)))
    _emit(_two_column(["basic", "isotonized"], est.basic.values, est.isotonized.fitted), args.out)


def cmd_fit_reg(args) -> None:
    p = load_preorder(args.preorder)
    est = regression_means(p, Sample.regression_pairs(read_pairs(args.pairs)))
    _emit(_two_column(["basic", "isotonized", "weight"], est.basic.values,
                      est.isotonized.fitted, est.empirical_weights), args.out)


def cmd_simulate(args) -> None:
    p = load_preorder(args.preorder)
    g0 = read_vector(args.g0)
    if args.scenario == "pmf":
        scenario = PmfScenario(p, g0)
    else:
        scenario = RegressionScenario(p, g0, sigma=args.sigma)
    lp = level_partition(p, scenario.reference)
    seed = _rng.resolve_seed(args.seed)
    report = limit_check(scenario, lp, args.n, args.reps, seed, workers=args.threads)
    _emit(report.to_json() + "\n", None)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "mcreport.json").write_text(report.to_json() + "\n")
        write_matrix_csv(out / "draws_finite.csv", report.finite_draws)
        write_matrix_csv(out / "draws_limit.csv", report.limit_draws)


def cmd_experiment(args) -> None:
    cfg = ExperimentConfig.from_json(args.config)
    if args.out:
        cfg.out = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    result = run_experiment(cfg, workers=args.threads)
    if cfg.scenario == "figure1":
        quart = {str(n): s.quartiles() for n, s in result.items()}
        sys.stdout.write(_json(quart))
    else:
        sys.stdout.write(result.to_json() + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isocone", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="isotonic (or antitonic) regression of a vector")
    s.add_argument("--preorder", required=True)
    s.add_argument("--values", required=True)
    s.add_argument("--weights")
    s.add_argument("--antitonic", action="store_true")
    s.add_argument("--out", help="fitted vector CSV (default: stdout)")
    s.add_argument("--diagnostics", help="write solver diagnostics JSON here")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("partition", help="comparable level sets of a reference vector")
    s.add_argument("--preorder", required=True)
    s.add_argument("--reference", required=True)
    s.add_argument("--truncate", type=int, metavar="M")
    s.add_argument("--out")
    s.set_defaults(func=cmd_partition)

    s = sub.add_parser("fit-pmf", help="empirical and antitonic pmf from draws")
    s.add_argument("--preorder", required=True)
    s.add_argument("--draws", required=True, help="CSV of 0-based element indices")
    s.add_argument("--out")
    s.set_defaults(func=cmd_fit_pmf)

    s = sub.add_parser("fit-reg", help="cell means and isotonic regression from pairs")
    s.add_argument("--preorder", required=True)
    s.add_argument("--pairs", required=True, help="CSV of 'index,response' rows")
    s.add_argument("--out")
    s.set_defaults(func=cmd_fit_reg)

    for name, func, helptext in (
        ("simulate", cmd_simulate, "finite-sample law vs limit law"),
        ("experiment", cmd_experiment, "run an experiment config"),
    ):
        s = sub.add_parser(name, help=helptext)
        if name == "simulate":
            s.add_argument("--scenario", choices=("pmf", "reg"), required=True)
            s.add_argument("--preorder", required=True)
            s.add_argument("--g0", required=True)
            s.add_argument("--n", type=int, required=True)
            s.add_argument("--reps", type=int, default=1000)
            s.add_argument("--sigma", type=float, default=1.0)
        else:
            s.add_argument("--config", required=True)
        s.add_argument("--seed", type=int, help="default: $ISOCONE_SEED, then a fixed constant")
        s.add_argument("--out", help="output directory")
        s.add_argument("--threads", type=int, default=default_workers(),
                       help="worker processes; results do not depend on it")
        s.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError, KeyError, ConvergenceError, json.JSONDecodeError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
