import argparse
import logging
import pathlib
import sys
from typing import Any, Optional, Sequence

from ensemble_cma import ConfigError
from ensemble_cma.benchmarks import NpvProxy
from ensemble_cma.harness.campaign import run_campaign
from ensemble_cma.harness.compare import load_trace_dirs, render_summary, summarize
from ensemble_cma.harness.config import VERIFICATION_POLICIES, RunConfig, load_config
from ensemble_cma.optimizer import OptimizerError

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_FAILURE = 2

# Command-line flag -> configuration key.
OVERRIDES = {
    "strategy": "strategy",
    "label": "label",
    "seed": "master_seed",
    "runs": "n_runs",
    "budget": "budget_simulations",
    "lambda": "population_size",
    "dmax": "selection_distance",
    "ns1": "bootstrap_samples",
    "ns2": "main_samples",
    "nsim": "bootstrap_threshold",
    "nnmax": "max_neighbors",
    "risk": "risk_factor",
    "verify": "verification",
    "problem": "problem",
    "dimension": "dimension",
    "problem_seed": "problem_seed",
    "distance_scaling": "distance_scaling",
}


def setup_logger(verbose: bool) -> None:
    logging.basicConfig(
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        level=logging.DEBUG if verbose else logging.INFO,
    )


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=pathlib.Path, help="YAML config file")
    parser.add_argument("--problem", choices=["shifted_sphere", "npv_proxy"])
    parser.add_argument("--dimension", type=int)
    parser.add_argument("--problem-seed", type=int)
    parser.add_argument("--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ensemble-cma",
        description="CMA-ES campaigns on multi-realization objectives.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="run an optimization campaign")
    _add_config_arguments(run)
    run.add_argument(
        "--strategy", choices=["mean_of_samples", "one_realization", "neighborhood"]
    )
    run.add_argument("--label")
    run.add_argument("--seed", type=int)
    run.add_argument("--runs", type=int)
    run.add_argument("--budget", type=int)
    run.add_argument("--lambda", type=int, dest="lambda")
    run.add_argument("--dmax", type=float)
    run.add_argument("--ns1", type=int)
    run.add_argument("--ns2", type=int)
    run.add_argument("--nsim", type=int)
    run.add_argument("--nnmax", type=int)
    run.add_argument("--risk", type=float)
    run.add_argument("--verify", choices=VERIFICATION_POLICIES)
    run.add_argument("--distance-scaling", choices=["C", "sigma2C"])
    run.add_argument("--out", type=pathlib.Path, required=True)

    compare = subparsers.add_parser("compare", help="summarize trace directories")
    compare.add_argument("trace_dirs", type=pathlib.Path, nargs="+")
    compare.add_argument("--thresholds", type=float, nargs="+", required=True)
    compare.add_argument("--verbose", action="store_true")

    fields = subparsers.add_parser(
        "fields", help="export the NPV proxy realizations as CSV grids"
    )
    _add_config_arguments(fields)
    fields.add_argument("--out", type=pathlib.Path, required=True)

    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    mapping: dict[str, Any] = {}
    if args.config is not None:
        mapping.update(load_config(args.config))
    for flag, key in OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            mapping[key] = value
    return RunConfig.from_mapping(mapping)


def run_command(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    traces = run_campaign(config, args.out)
    incomplete = [t.run_id for t in traces if not t.complete]
    if incomplete:
        logging.error(f"Runs {incomplete} did not complete.")
        return EXIT_RUNTIME_FAILURE
    return EXIT_OK


def compare_command(args: argparse.Namespace) -> int:
    try:
        traces_by_label = load_trace_dirs(args.trace_dirs)
    except ConfigError:
        raise
    except (OSError, ValueError) as e:
        logging.error(f"Cannot read traces: {e}")
        return EXIT_RUNTIME_FAILURE
    print(render_summary(summarize(traces_by_label, args.thresholds)), end="")
    return EXIT_OK


def fields_command(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    settings = config.problem_settings
    if settings.problem != NpvProxy.name():
        raise ConfigError(f"Only npv_proxy has fields, got {settings.problem}.")
    problem = settings.build(config.estimator.n_realizations)
    assert isinstance(problem, NpvProxy)
    args.out.mkdir(parents=True, exist_ok=True)
    for field in problem.fields:
        field.to_csv(args.out / f"field_{field.realization_id:03d}.csv")
    logging.info(f"Wrote {len(problem.fields)} fields to {args.out}")
    return EXIT_OK


COMMANDS = {
    "run": run_command,
    "compare": compare_command,
    "fields": fields_command,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logger(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logging.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except OptimizerError as e:
        logging.exception(f"Optimizer failure: {e}")
        return EXIT_RUNTIME_FAILURE


if __name__ == "__main__":
    sys.exit(main())
