"""Data sources package: sampling, estimation and file formats."""

from .estimators import (
    as_mdp,
    count,
    dirichlet_mean_model,
    estimate_baseline,
    map_model,
    merge_counts,
    mixture_baseline,
    mle_model,
)
from .trajectory_sampler import make_rng, sample_trajectories

__all__ = [
    "as_mdp",
    "count",
    "dirichlet_mean_model",
    "estimate_baseline",
    "make_rng",
    "map_model",
    "merge_counts",
    "mixture_baseline",
    "mle_model",
    "sample_trajectories"
]
