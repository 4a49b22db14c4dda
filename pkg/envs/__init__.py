"""Benchmark environments for safe policy improvement."""

import logging
from typing import Any, Callable, Dict

from models import Benchmark, InvalidInputError

from .frozen_lake import frozen_lake
from .pacman import pacman
from .random_mdps import random_mdps
from .wet_chicken import wet_chicken

logger = logging.getLogger(__name__)

BENCHMARK_BUILDERS: Dict[str, Callable[..., Benchmark]] = {
    "random": random_mdps,
    "wetchicken": wet_chicken,
    "frozenlake": frozen_lake,
    "pacman": pacman,
}


def make_benchmark(name: str, **params: Any) -> Benchmark:
    """Build a benchmark by registry name with constructor keyword arguments."""
    try:
        builder = BENCHMARK_BUILDERS[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown benchmark {name!r}; choose from {sorted(BENCHMARK_BUILDERS)}"
        ) from None
    logger.info(f"Building benchmark {name} with {params}")
    return builder(**params)


__all__ = [
    "BENCHMARK_BUILDERS",
    "make_benchmark",
    "frozen_lake",
    "pacman",
    "random_mdps",
    "wet_chicken"
]
