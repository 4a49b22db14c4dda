"""Dataset-size sweeps: run every method on fresh datasets and aggregate the results."""

import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import CVAR_FRACTION
from data_sources.file_formats import write_shield
from data_sources.trajectory_sampler import sample_trajectories
from envs import make_benchmark
from models import Benchmark, ExperimentConfig, InvalidInputError, RunRecord, RunStatus, Shield
from workflow import get_workflow

logger = logging.getLogger(__name__)

DATASET_STREAM = 0
ENVIRONMENT_STREAM = 1

CSV_COLUMNS = ["method", "size", "run", "performance", "theta_safe", "relaxed_states"]


def run_seed(master: int, size_index: int, run_index: int, stream: int = DATASET_STREAM) -> int:
    """Independent 63-bit seed for one (size, run) pair and stream."""
    sequence = np.random.SeedSequence(entropy=master, spawn_key=(size_index, run_index, stream))
    return int(sequence.generate_state(1, np.uint64)[0] >> np.uint64(1))


def benchmark_for(config: ExperimentConfig, seed: Optional[int] = None) -> Benchmark:
    """Build the configured benchmark; random MDPs take ``seed`` for generation."""
    params = dict(config.env_params)
    params["discount"] = config.gamma
    if config.env == "random":
        params["seed"] = config.seed if seed is None else seed
    return make_benchmark(config.env, **params)


def _run_pipelines(
    config: ExperimentConfig,
    shared: Optional[Benchmark],
    size_index: int,
    size: int,
    run_index: int,
) -> Tuple[List[RunRecord], Optional[Shield]]:
    """All methods of one (size, run) cell on a single dataset."""
    try:
        benchmark = shared if shared is not None else benchmark_for(
            config, run_seed(config.seed, size_index, run_index, ENVIRONMENT_STREAM)
        )
        dataset = sample_trajectories(
            benchmark.mdp,
            benchmark.behavior(config.epsilon),
            budget=size,
            horizon=config.horizon,
            seed=run_seed(config.seed, size_index, run_index),
            episodic=benchmark.episodic,
        )
    except Exception as e:
        logger.error(f"Could not prepare run {run_index} at size {size}: {e}")
        error = f"{type(e).__name__}: {e}"
        return [
            RunRecord(method=method, dataset_size=size, run_index=run_index, status=RunStatus.FAILED, error=error)
            for method in config.methods
        ], None

    workflow = get_workflow()
    records, dumped = [], None
    for method in config.methods:
        started = time.perf_counter()
        state = workflow.run(benchmark, dataset, method, config)
        elapsed = time.perf_counter() - started
        if state.error is not None:
            records.append(RunRecord(
                method=method, dataset_size=size, run_index=run_index,
                wall_time=elapsed, status=RunStatus.FAILED, error=state.error,
            ))
            continue
        relaxed = len(state.shield.relaxed_states) if state.shield is not None else 0
        records.append(RunRecord(
            method=method,
            dataset_size=size,
            run_index=run_index,
            performance=state.performance,
            theta_safe=state.theta_safe,
            relaxed_state_count=relaxed,
            wall_time=elapsed,
        ))
        if dumped is None and state.shield is not None:
            dumped = state.shield
    return records, dumped


def run_sweep(config: ExperimentConfig) -> List[RunRecord]:
    """
    Run every configured method for each dataset size and run index.

    Args:
        config: Sweep configuration

    Returns:
        Records ordered by size, run and method, independent of the worker count
    """
    logger.info(
        f"Starting sweep on {config.env}: sizes {config.dataset_sizes}, "
        f"{config.runs} runs, methods {[m.value for m in config.methods]}"
    )
    # Random MDPs are regenerated per run; other benchmarks are shared
    shared = None if config.env == "random" else benchmark_for(config)
    jobs = [
        (size_index, size, run_index)
        for size_index, size in enumerate(config.dataset_sizes)
        for run_index in range(config.runs)
    ]

    def job(cell):
        return _run_pipelines(config, shared, *cell)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(job, jobs))
    else:
        results = [job(cell) for cell in jobs]

    records = [record for cell_records, _ in results for record in cell_records]
    if config.dump_shield:
        shield = next((cell_shield for _, cell_shield in results if cell_shield is not None), None)
        if shield is not None:
            write_shield(shield, config.dump_shield)
        else:
            logger.warning("No shielded pipeline produced a shield to dump")

    failed = sum(record.status == RunStatus.FAILED for record in records)
    logger.info(f"Sweep finished: {len(records)} records, {failed} failed")
    return records


def cvar(values: Sequence[float], fraction: float = CVAR_FRACTION) -> float:
    """Mean of the lowest ceil(fraction * n) values."""
    if not 0.0 < fraction <= 1.0:
        raise InvalidInputError(f"fraction must lie in (0, 1], got {fraction}")
    ordered = np.sort(np.asarray(values, dtype=float))
    if ordered.size == 0:
        raise InvalidInputError("cvar of an empty list")
    k = max(1, math.ceil(fraction * ordered.size - 1e-9))
    return float(np.mean(ordered[:k]))


def aggregate(records: Sequence[RunRecord], fraction: float = CVAR_FRACTION) -> List[Dict[str, Any]]:
    """Summary statistics per (method, size), sorted by method then size.

    Failed runs are counted but excluded from the statistics. ``safe_fraction``
    is None for methods that record no theta-safety.
    """
    groups: Dict[Tuple[str, int], List[RunRecord]] = {}
    for record in records:
        groups.setdefault((record.method.value, record.dataset_size), []).append(record)

    summary = []
    for (method, size), members in sorted(groups.items()):
        values = np.sort([r.performance for r in members if r.performance is not None])
        flags = [r.theta_safe for r in members if r.theta_safe is not None]
        entry: Dict[str, Any] = {
            "method": method,
            "size": size,
            "runs": len(members),
            "failed": sum(r.status == RunStatus.FAILED for r in members),
            "mean": None,
            "cvar_1pct": None,
            "ci95_halfwidth": None,
            "safe_fraction": sum(flags) / len(flags) if flags else None,
        }
        if values.size:
            entry["mean"] = float(np.mean(values))
            entry["cvar_1pct"] = cvar(values, fraction)
            stderr = float(np.std(values, ddof=1)) / math.sqrt(values.size) if values.size > 1 else 0.0
            entry["ci95_halfwidth"] = 1.96 * stderr
        summary.append(entry)
    return summary


def records_frame(records: Sequence[RunRecord], timings: bool = False) -> pd.DataFrame:
    """Plot-ready table with one row per record."""
    rows = [
        {
            "method": r.method.value,
            "size": r.dataset_size,
            "run": r.run_index,
            "performance": r.performance,
            "theta_safe": r.theta_safe,
            "relaxed_states": r.relaxed_state_count,
            "seconds": r.wall_time,
        }
        for r in records
    ]
    columns = CSV_COLUMNS + (["seconds"] if timings else [])
    return pd.DataFrame(rows, columns=CSV_COLUMNS + ["seconds"])[columns]


def write_results(records: Sequence[RunRecord], config: ExperimentConfig) -> Dict[str, str]:
    """Write the CSV and, when configured, the JSON mirror. Returns the written paths."""
    written = {}
    if config.output:
        records_frame(records, config.record_timings).to_csv(config.output, index=False)
        written["csv"] = config.output
        logger.info(f"Wrote {len(records)} records to {config.output}")
    if config.json_output:
        payload = {
            "config": config.model_dump(mode="json"),
            "records": [r.model_dump(mode="json", exclude=None if config.record_timings else {"wall_time"})
                        for r in records],
            "aggregates": aggregate(records),
        }
        with open(config.json_output, "w") as f:
            json.dump(payload, f, indent=2)
        written["json"] = config.json_output
        logger.info(f"Wrote JSON results to {config.json_output}")
    return written
