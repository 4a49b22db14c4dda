"""Estimator Agent for turning a dataset into counts, a baseline and an MLE-MDP."""

import logging
from typing import Any, Dict

from data_sources.estimators import as_mdp, count, estimate_baseline, mle_model
from models import RunState

logger = logging.getLogger(__name__)


class EstimatorAgent:
    """Agent responsible for the point estimates every method starts from."""

    def __init__(self):
        """Initialize the Estimator Agent."""
        self.name = "Estimator Agent"
        logger.info(f"Initialized {self.name}")

    def estimate(self, state: RunState) -> Dict[str, Any]:
        """
        Count the dataset and derive the estimated baseline and MLE-MDP.

        Args:
            state: Run state holding the benchmark and the dataset

        Returns:
            Update with counts, baseline and mle_mdp
        """
        mdp = state.benchmark.mdp
        counts = count(state.dataset, mdp.num_states, mdp.num_actions)
        logger.info(
            f"{self.name} counted {state.dataset.total_transitions} transitions "
            f"over {int((counts.n_sa > 0).sum())} state-action pairs"
        )

        baseline = estimate_baseline(counts, mdp.num_actions, mdp.available)
        mle_mdp = as_mdp(mdp, mle_model(counts))
        return {"counts": counts, "baseline": baseline, "mle_mdp": mle_mdp}
