"""LangGraph workflow for one safe policy improvement run."""

import logging
from typing import Any, Dict, Literal, Optional

from langgraph.graph import END, StateGraph

from agents.duipi_agent import DuipiAgent
from agents.estimator_agent import EstimatorAgent
from agents.shield_agent import ShieldAgent
from agents.spibb_agent import SpibbAgent
from mdp_core import optimal_policy, performance
from models import Benchmark, Dataset, ExperimentConfig, Method, RunState, SafeSpiError, TabularPolicy
from shield import is_theta_safe_policy

logger = logging.getLogger(__name__)

DUIPI_METHODS = (Method.DUIPI, Method.DUIPI_SHIELD)


class SafePolicyImprovementWorkflow:
    """LangGraph workflow: estimate, optionally shield, improve and evaluate."""

    def __init__(self):
        """Initialize the workflow with all agents."""
        self.estimator = EstimatorAgent()
        self.shielder = ShieldAgent()
        self.spibb = SpibbAgent()
        self.duipi = DuipiAgent()

        self.workflow = self._create_workflow()
        logger.info("Safe policy improvement workflow initialized")

    def _create_workflow(self) -> StateGraph:
        """Create the LangGraph workflow."""
        workflow = StateGraph(RunState)

        workflow.add_node("estimate", self._estimate_node)
        workflow.add_node("shield", self._shield_node)
        workflow.add_node("improve", self._improve_node)
        workflow.add_node("evaluate", self._evaluate_node)

        workflow.set_entry_point("estimate")

        # Shielded methods and the shielded baseline pass through the shield
        workflow.add_conditional_edges(
            "estimate",
            self._shield_decision,
            {
                "shield": "shield",
                "improve": "improve"
            }
        )
        workflow.add_edge("shield", "improve")
        workflow.add_edge("improve", "evaluate")
        workflow.add_edge("evaluate", END)

        return workflow.compile(checkpointer=None)

    def _estimate_node(self, state: RunState) -> Dict[str, Any]:
        """Execute the estimator agent."""
        logger.info("Executing estimate node")
        try:
            return self.estimator.estimate(state)
        except Exception as e:
            logger.error(f"Error in estimate node: {e}")
            raise

    def _shield_node(self, state: RunState) -> Dict[str, Any]:
        """Execute the shield agent."""
        logger.info("Executing shield node")
        try:
            return self.shielder.build(state)
        except Exception as e:
            logger.error(f"Error in shield node: {e}")
            raise

    def _improve_node(self, state: RunState) -> Dict[str, Any]:
        """Compute the policy of the run's method."""
        logger.info(f"Executing improve node for {state.method.value}")
        try:
            if state.method == Method.OPTIMAL:
                policy, _ = optimal_policy(state.benchmark.mdp)
                return {"policy": policy}
            if state.method == Method.BEHAVIOR:
                return {"policy": state.benchmark.behavior(state.config.epsilon)}
            if state.method in DUIPI_METHODS:
                return self.duipi.improve(state)
            return self.spibb.improve(state)
        except Exception as e:
            logger.error(f"Error in improve node: {e}")
            raise

    def _evaluate_node(self, state: RunState) -> Dict[str, Any]:
        """Evaluate the policy exactly on the true MDP."""
        logger.info("Executing evaluate node")
        value = performance(state.benchmark.mdp, state.policy)
        theta_safe = None
        if state.method.shielded and state.shield is not None:
            theta_safe = is_theta_safe_policy(state.policy, state.shield)
        return {"performance": value, "theta_safe": theta_safe}

    def _shield_decision(self, state: RunState) -> Literal["shield", "improve"]:
        return "shield" if state.method.shielded else "improve"

    def execute(
        self,
        benchmark: Benchmark,
        dataset: Dataset,
        method: Method,
        config: ExperimentConfig,
    ) -> RunState:
        """
        Run the pipeline and let errors propagate.

        Args:
            benchmark: True benchmark the dataset was collected on
            dataset: Offline dataset
            method: Policy construction method
            config: Experiment configuration with the method's hyperparameters

        Returns:
            Final run state
        """
        initial_state = RunState(benchmark=benchmark, dataset=dataset, method=method, config=config)
        final_state = self.workflow.invoke(initial_state)
        if isinstance(final_state, RunState):
            return final_state
        return RunState(**final_state)

    def run(
        self,
        benchmark: Benchmark,
        dataset: Dataset,
        method: Method,
        config: ExperimentConfig,
    ) -> RunState:
        """Run the pipeline; a failure is recorded in the returned state's ``error``."""
        logger.info(f"Starting {method.value} run on {benchmark.name} with {dataset.total_transitions} transitions")
        try:
            final_state = self.execute(benchmark, dataset, method, config)
            logger.info(f"{method.value} run completed with performance {final_state.performance:.6f}")
            return final_state
        except Exception as e:
            logger.error(f"Error running {method.value} pipeline: {e}")
            return RunState(
                benchmark=benchmark,
                dataset=dataset,
                method=method,
                config=config,
                error=f"{type(e).__name__}: {e}",
            )


_default_workflow: Optional[SafePolicyImprovementWorkflow] = None


def get_workflow() -> SafePolicyImprovementWorkflow:
    """Shared workflow instance; its agents hold no per-run state."""
    global _default_workflow
    if _default_workflow is None:
        _default_workflow = SafePolicyImprovementWorkflow()
    return _default_workflow


def _improved_policy(method: Method, dataset: Dataset, benchmark: Benchmark, config: ExperimentConfig) -> TabularPolicy:
    state = get_workflow().execute(benchmark, dataset, method, config)
    if state.policy is None:
        raise SafeSpiError(f"{method.value} pipeline produced no policy")
    return state.policy


def run_spibb(dataset: Dataset, benchmark: Benchmark, config: ExperimentConfig, shielded: bool = False) -> TabularPolicy:
    """SPIBB (or shielded SPIBB) policy for ``dataset``."""
    method = Method.SPIBB_SHIELD if shielded else Method.SPIBB
    return _improved_policy(method, dataset, benchmark, config)


def run_duipi(dataset: Dataset, benchmark: Benchmark, config: ExperimentConfig, shielded: bool = False) -> TabularPolicy:
    """DUIPI (or shielded DUIPI) policy for ``dataset``."""
    method = Method.DUIPI_SHIELD if shielded else Method.DUIPI
    return _improved_policy(method, dataset, benchmark, config)
