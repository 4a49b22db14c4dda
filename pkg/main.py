"""Command-line entry point for safe policy improvement sweeps."""

import argparse
import logging
import os
from typing import Any, Dict, List, Optional

from config import BENCHMARKS, DEFAULT_HORIZON, DEFAULT_RUNS, DEFAULT_SEED, DEFAULT_WORKERS, LOG_LEVEL, LOGS_DIR, RESULTS_DIR, ensure_output_dirs
from envs import BENCHMARK_BUILDERS
from models import ExperimentConfig, RunRecord, RunStatus

logger = logging.getLogger(__name__)

# CLI flag -> ExperimentConfig field
CONFIG_FLAGS = {
    "runs": "runs",
    "seed": "seed",
    "gamma": "gamma",
    "epsilon": "epsilon",
    "nwedge": "n_wedge",
    "delta": "delta",
    "xi": "xi",
    "alpha": "alpha",
    "theta": "theta",
    "kappa": "kappa",
    "nu": "nu",
    "duipi_rounds": "duipi_rounds",
    "horizon": "horizon",
    "workers": "workers",
}

# CLI flag -> benchmark constructor parameter
ENV_FLAGS = {
    "grid_size": "grid_size",
    "ghosts": "num_ghosts",
    "states": "num_states",
    "actions": "num_actions",
    "branching": "branching",
    "traps": "num_traps",
}

CONFIG_KEYS = {"gamma", "delta", "xi", "n_wedge", "nu", "epsilon", "theta", "kappa", "alpha", "dataset_sizes", "env_params"}


def setup_logging(verbose: bool = False) -> None:
    """Log to the console and to outputs/logs/safe_spi.log."""
    ensure_output_dirs()
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(f'{LOGS_DIR}/safe_spi.log'),
            logging.StreamHandler()
        ]
    )


def _csv_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _read_map(path: str) -> List[str]:
    with open(path, "r") as f:
        return [line.rstrip("\n") for line in f if line.strip()]


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge the benchmark defaults with the command-line overrides."""
    defaults = BENCHMARKS.get(args.env, {})
    values: Dict[str, Any] = {key: value for key, value in defaults.items() if key in CONFIG_KEYS}
    values["env"] = args.env
    values["env_params"] = dict(values.get("env_params", {}))
    values.setdefault("runs", DEFAULT_RUNS)
    values.setdefault("seed", DEFAULT_SEED)
    values.setdefault("horizon", DEFAULT_HORIZON)
    values.setdefault("workers", DEFAULT_WORKERS)

    for flag, field in CONFIG_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            values[field] = value
    if args.sizes:
        values["dataset_sizes"] = [int(size) for size in _csv_list(args.sizes)]
    if args.methods:
        values["methods"] = _csv_list(args.methods)

    env_params = values["env_params"]
    for flag, param in ENV_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            env_params[param] = value
    if args.no_fall_state:
        env_params["fall_state"] = False
    if args.map:
        key = "maze_spec" if args.env == "pacman" else "map_spec"
        env_params[key] = _read_map(args.map)

    values["output"] = args.out or os.path.join(RESULTS_DIR, f"{args.env}_results.csv")
    values["json_output"] = args.json
    values["dump_shield"] = args.dump_shield
    values["record_timings"] = args.timings
    return ExperimentConfig(**values)


def print_sweep_summary(aggregates: List[Dict[str, Any]]) -> None:
    """Print mean, CVaR and safety per method and dataset size."""
    print("\n" + "="*80)
    print("SWEEP SUMMARY")
    print("="*80)
    print(f"{'method':<16}{'size':>8}{'mean':>12}{'cvar_1pct':>12}{'ci95':>10}{'safe':>8}{'failed':>8}")
    print("-" * 80)

    def fmt(value: Optional[float], width: int, digits: int = 4) -> str:
        return f"{'-':>{width}}" if value is None else f"{value:>{width}.{digits}f}"

    for entry in aggregates:
        print(
            f"{entry['method']:<16}{entry['size']:>8}"
            f"{fmt(entry['mean'], 12)}{fmt(entry['cvar_1pct'], 12)}"
            f"{fmt(entry['ci95_halfwidth'], 10)}{fmt(entry['safe_fraction'], 8, 2)}{entry['failed']:>8}"
        )
    print("="*80)


def print_error_summary(records: List[RunRecord]) -> None:
    """Print one line per failed run."""
    failed = [r for r in records if r.status == RunStatus.FAILED]
    print("\n" + "="*80)
    print(f"FAILED RUNS: {len(failed)}")
    print("="*80)
    for r in failed:
        print(f"{r.method.value} size={r.dataset_size} run={r.run_index}: {r.error}")


def print_benchmarks() -> None:
    """Print the default hyperparameters of every benchmark."""
    print("\n" + "="*80)
    print("BENCHMARK DEFAULTS")
    print("="*80)
    for name, params in BENCHMARKS.items():
        print(f"{name}: {params.get('description', '')}")
        for key in ("gamma", "delta", "xi", "n_wedge", "nu", "epsilon", "theta", "kappa", "alpha"):
            if key in params:
                print(f"   {key}: {params[key]}")
        print(f"   dataset_sizes: {params.get('dataset_sizes')}")
        print(f"   env_params: {params.get('env_params', {})}")
        print()


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Shielded safe policy improvement experiments")
    parser.add_argument(
        "--verbose",
        "-v",
        action="store_true",
        help="Enable verbose logging"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a dataset-size sweep")
    run.add_argument("--env", required=True, choices=sorted(BENCHMARK_BUILDERS), help="Benchmark name")
    run.add_argument("--sizes", help="Comma-separated dataset sizes")
    run.add_argument("--runs", type=int, help="Runs per dataset size")
    run.add_argument("--seed", type=int, help="Master seed")
    run.add_argument("--methods", help="Comma-separated methods, e.g. spibb,spibb_shield")
    run.add_argument("--gamma", type=float, help="Discount factor")
    run.add_argument("--epsilon", type=float, help="Heuristic weight of the behaviour policy")
    run.add_argument("--nwedge", type=int, help="SPIBB count threshold")
    run.add_argument("--delta", type=float, help="IMDP confidence")
    run.add_argument("--xi", type=float, help="Interval lower-bound floor")
    run.add_argument("--alpha", type=float, help="Dirichlet prior parameter")
    run.add_argument("--theta", type=float, help="Safety threshold")
    run.add_argument("--kappa", type=float, help="Relaxation for states without safe actions")
    run.add_argument("--nu", type=float, help="DUIPI uncertainty penalty")
    run.add_argument("--duipi-rounds", dest="duipi_rounds", type=int, help="DUIPI improvement rounds")
    run.add_argument("--horizon", type=int, help="Maximum trajectory length")
    run.add_argument("--workers", type=int, help="Worker threads")
    run.add_argument("--out", "-o", help="CSV output path")
    run.add_argument("--json", help="JSON output path")
    run.add_argument("--dump-shield", dest="dump_shield", help="Write the first computed shield to this path")
    run.add_argument("--timings", action="store_true", help="Add a seconds column to the CSV")
    run.add_argument("--map", help="ASCII map file (Frozen Lake or Pacman)")
    run.add_argument("--grid-size", dest="grid_size", type=int, help="Pacman grid size")
    run.add_argument("--ghosts", type=int, help="Pacman ghost count")
    run.add_argument("--states", type=int, help="Random MDP state count")
    run.add_argument("--actions", type=int, help="Random MDP action count")
    run.add_argument("--branching", type=int, help="Random MDP successors per pair")
    run.add_argument("--traps", type=int, help="Random MDP trap count")
    run.add_argument("--no-fall-state", dest="no_fall_state", action="store_true",
                     help="Wet Chicken without the explicit waterfall state")

    commands.add_parser("benchmarks", help="Show the benchmark defaults")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main function to run the CLI."""
    args = create_parser().parse_args(argv)
    setup_logging(args.verbose)

    if args.command == "benchmarks":
        print_benchmarks()
        return 0

    from harness import aggregate, run_sweep, write_results

    try:
        config = build_config(args)
    except Exception as e:
        print(f"\nInvalid configuration: {e}")
        logger.error(f"Invalid configuration: {e}")
        return 2

    print("Safe Policy Improvement Sweep")
    print("=" * 50)
    print(f"Benchmark: {config.env}")
    print(f"Dataset sizes: {config.dataset_sizes}")
    print(f"Runs: {config.runs} | Seed: {config.seed}")
    print(f"Methods: {', '.join(m.value for m in config.methods)}")
    print("=" * 50)

    try:
        records = run_sweep(config)
        written = write_results(records, config)
    except KeyboardInterrupt:
        print("\n\nSweep interrupted by user.")
        logger.info("Sweep interrupted by user")
        return 130
    except Exception as e:
        print(f"\nError running sweep: {e}")
        logger.error(f"Error running sweep: {e}")
        return 1

    print_sweep_summary(aggregate(records))
    for kind, path in written.items():
        print(f"{kind.upper()} results saved to: {path}")
    if config.dump_shield and os.path.exists(config.dump_shield):
        print(f"Shield saved to: {config.dump_shield}")

    if any(r.status == RunStatus.FAILED for r in records):
        print_error_summary(records)
        return 1
    return 0


if __name__ == "__main__":
    exit(main())
