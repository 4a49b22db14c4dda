"""Configuration settings for the safe policy improvement toolkit."""

import os
import json
import copy
import logging
from dotenv import load_dotenv

logger = logging.getLogger(__name__)

# Load environment variables
load_dotenv()

# Benchmark defaults file (versioned)
BENCHMARKS_CONFIG_FILE = os.getenv("SAFE_SPI_CONFIG_FILE", "benchmarks_config.json")
CONFIG_VERSION = 1

LOG_LEVEL = os.getenv("SAFE_SPI_LOG_LEVEL", "INFO")
DEFAULT_SEED = int(os.getenv("SAFE_SPI_SEED", "0"))
DEFAULT_WORKERS = int(os.getenv("SAFE_SPI_WORKERS", "1"))

# Solver configuration
VALUE_TOL = 1e-8
MAX_VALUE_ITERATIONS = 100_000
SPIBB_MAX_ROUNDS = 1_000
DUIPI_ROUNDS = 300

# Experiment configuration
DEFAULT_HORIZON = 200
DEFAULT_RUNS = 100
CVAR_FRACTION = 0.01
GENERATION_RETRIES = 100

# Shared across benchmarks
COMMON_DEFAULTS = {
    "gamma": 0.95,
    "delta": 0.1,
    "xi": 1e-8,
}

FALLBACK_BENCHMARKS = {
    "random": {
        "n_wedge": 3, "nu": 0.1, "epsilon": 0.5, "theta": 0.2, "kappa": 0.05, "alpha": 5.0,
        "dataset_sizes": [10, 20, 50, 100, 200, 500, 1000],
        "env_params": {"num_states": 50, "num_actions": 4, "branching": 4, "num_traps": 5,
                       "goal_reward": 1.0, "trap_reward": -1.0},
    },
    "wetchicken": {
        "n_wedge": 7, "nu": 0.05, "epsilon": 0.05, "theta": 0.2, "kappa": 0.5, "alpha": 2.0,
        "dataset_sizes": [500, 1000, 2000, 5000, 10000],
        "env_params": {"fall_state": True, "fall_reward": -30.0},
    },
    "frozenlake": {
        "n_wedge": 3, "nu": 1.0, "epsilon": 0.5, "theta": 0.2, "kappa": 0.02, "alpha": 5.0,
        "dataset_sizes": [10, 50, 200, 1000],
        "env_params": {"slip_intended": 1.0 / 3.0, "goal_reward": 1.0, "hole_reward": -1.0},
    },
    "pacman": {
        "n_wedge": 3, "nu": 1.0, "epsilon": 0.5, "theta": 0.01, "kappa": 0.01, "alpha": 10.0,
        "dataset_sizes": [10, 50, 200, 1000],
        "env_params": {"grid_size": 7, "num_ghosts": 2, "goal_reward": 1.0, "eaten_reward": -1.0},
    },
}


def load_benchmarks_config():
    """Load per-benchmark defaults from the JSON config file."""
    try:
        if os.path.exists(BENCHMARKS_CONFIG_FILE):
            with open(BENCHMARKS_CONFIG_FILE, 'r') as f:
                raw = json.load(f)
            if raw.get("version") != CONFIG_VERSION:
                logger.warning(
                    f"Config version {raw.get('version')} differs from supported version {CONFIG_VERSION}"
                )
            common = {**COMMON_DEFAULTS, **raw.get("common", {})}
            benchmarks = raw["benchmarks"]
        else:
            logger.warning(f"{BENCHMARKS_CONFIG_FILE} not found. Using fallback configuration.")
            common = dict(COMMON_DEFAULTS)
            benchmarks = copy.deepcopy(FALLBACK_BENCHMARKS)

        return {name: {**common, **params} for name, params in benchmarks.items()}

    except (json.JSONDecodeError, KeyError, TypeError) as e:
        logger.warning(f"Error loading benchmarks config: {e}. Using fallback configuration.")
        return {name: {**COMMON_DEFAULTS, **params} for name, params in copy.deepcopy(FALLBACK_BENCHMARKS).items()}


# Load benchmark defaults
BENCHMARKS = load_benchmarks_config()

# Output Configuration
OUTPUT_DIR = os.getenv("SAFE_SPI_OUTPUT_DIR", "outputs")
RESULTS_DIR = f"{OUTPUT_DIR}/results"
LOGS_DIR = f"{OUTPUT_DIR}/logs"


def ensure_output_dirs():
    """Create the output directories if they do not exist yet."""
    os.makedirs(OUTPUT_DIR, exist_ok=True)
    os.makedirs(RESULTS_DIR, exist_ok=True)
    os.makedirs(LOGS_DIR, exist_ok=True)
