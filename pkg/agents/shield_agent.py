"""Shield Agent for learning an interval MDP and deriving a theta-shield from it."""

import logging
from typing import Any, Dict

from data_sources.estimators import map_model
from imdp import build_imdp, robust_reach_avoid
from models import RunState
from shield import build_shield, shield_baseline, shield_mdp

logger = logging.getLogger(__name__)


class ShieldAgent:
    """Agent responsible for the shield and the shielded baseline and MLE-MDP."""

    def __init__(self):
        """Initialize the Shield Agent."""
        self.name = "Shield Agent"
        logger.info(f"Initialized {self.name}")

    def build(self, state: RunState) -> Dict[str, Any]:
        """
        Build the IMDP from the run's counts, compute robust reach-avoid
        scores and shield the estimated baseline and MLE-MDP.

        Args:
            state: Run state after estimation

        Returns:
            Update with shield, shielded_baseline and shielded_mle_mdp
        """
        config = state.config
        benchmark = state.benchmark
        logger.info(f"{self.name} building shield with theta={config.theta}, kappa={config.kappa}")

        point = map_model(state.counts, benchmark.graph, config.alpha)
        imdp = build_imdp(benchmark.mdp, state.counts, point, benchmark.graph, config.delta, config.xi)
        scores = robust_reach_avoid(imdp)
        shield = build_shield(scores, config.theta, config.kappa, benchmark.mdp)

        logger.info(
            f"{self.name} robust reach-avoid probability at the initial state: "
            f"{scores.v[benchmark.mdp.initial_state]:.4f}"
        )
        return {
            "shield": shield,
            "shielded_baseline": shield_baseline(state.baseline, shield),
            "shielded_mle_mdp": shield_mdp(state.mle_mdp, shield),
        }
