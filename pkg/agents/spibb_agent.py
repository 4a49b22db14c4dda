"""SPIBB Agent: baseline-bootstrapped policy improvement on the estimated MDP."""

import logging
from typing import Any, Dict, Optional

import numpy as np

from config import SPIBB_MAX_ROUNDS, VALUE_TOL
from mdp_core import check_policy, policy_evaluation
from models import (
    BootstrappedSet,
    ConvergenceError,
    CountTable,
    InvalidInputError,
    Mdp,
    Method,
    RunState,
    Shield,
    TabularPolicy,
)

logger = logging.getLogger(__name__)


def bootstrapped_set(counts: CountTable, n_wedge: int, shield: Optional[Shield] = None) -> BootstrappedSet:
    """Pairs seen at most ``n_wedge`` times, plus every pair the shield rules out."""
    if n_wedge < 0:
        raise InvalidInputError(f"n_wedge must be nonnegative, got {n_wedge}")
    membership = counts.n_sa <= n_wedge
    if shield is not None:
        if shield.allowed.shape != membership.shape:
            raise InvalidInputError("shield does not match the count table")
        membership = membership | ~shield.allowed
    return BootstrappedSet(membership=membership, n_wedge=n_wedge, shield_applied=shield is not None)


def spibb_policy_iteration(
    mdp: Mdp,
    baseline: TabularPolicy,
    bset: BootstrappedSet,
    tol: float = VALUE_TOL,
    max_rounds: int = SPIBB_MAX_ROUNDS,
) -> TabularPolicy:
    """Policy iteration constrained to copy the baseline on bootstrapped pairs.

    In every state the baseline mass of the free actions moves to the free
    action with the highest value; states without free actions keep the
    baseline row. The incumbent free action is only replaced on an
    improvement larger than tol.
    """
    check_policy(mdp, baseline)
    membership = bset.membership
    if membership.shape != baseline.probs.shape:
        raise InvalidInputError("bootstrapped set does not match the policy shape")

    base = baseline.probs
    free = mdp.available & ~membership
    has_free = free.any(axis=1)
    fixed = np.where(free, 0.0, base)
    free_mass = np.where(free, base, 0.0).sum(axis=1)
    rows = np.flatnonzero(has_free)

    policy = baseline
    incumbent = None
    warm = None
    for round_index in range(1, max_rounds + 1):
        values = policy_evaluation(mdp, policy, tol, initial=warm)
        warm = values.v
        q = np.where(free, values.q, -np.inf)[rows]
        best = q.max(axis=1)
        if incumbent is None:
            incumbent = np.argmax(q >= best[:, None] - tol, axis=1)
        else:
            keep = q[np.arange(rows.size), incumbent] >= best - tol
            incumbent = np.where(keep, incumbent, np.argmax(q, axis=1))

        probs = fixed.copy()
        probs[rows, incumbent] += free_mass[rows]
        probs[~has_free] = base[~has_free]
        if np.array_equal(probs, policy.probs):
            logger.debug(f"SPIBB policy iteration reached a fixed point after {round_index} rounds")
            return policy
        policy = TabularPolicy(probs=probs)

    raise ConvergenceError("SPIBB policy iteration did not reach a fixed point", float("nan"), max_rounds)


class SpibbAgent:
    """Agent responsible for SPIBB, shielded SPIBB and the baseline reference policies."""

    def __init__(self):
        """Initialize the SPIBB Agent."""
        self.name = "SPIBB Agent"
        logger.info(f"Initialized {self.name}")

    def improve(self, state: RunState) -> Dict[str, Any]:
        """
        Compute the policy of the run's method from the estimates in the state.

        Args:
            state: Run state holding counts, the estimated baseline and MLE-MDP,
                and for shielded methods the shield outputs

        Returns:
            Update with the improved policy
        """
        method = state.method
        config = state.config
        logger.info(f"{self.name} computing {method.value} policy")

        if method == Method.BASELINE:
            return {"policy": state.baseline}
        if method == Method.BASELINE_SHIELD:
            return {"policy": state.shielded_baseline}

        if method == Method.SPIBB_SHIELD:
            bset = bootstrapped_set(state.counts, config.n_wedge, state.shield)
            policy = spibb_policy_iteration(state.shielded_mle_mdp, state.shielded_baseline, bset)
        else:
            n_wedge = -1 if method == Method.BASIC else config.n_wedge
            membership = state.counts.n_sa <= n_wedge
            bset = BootstrappedSet(membership=membership, n_wedge=max(n_wedge, 0))
            policy = spibb_policy_iteration(state.mle_mdp, state.baseline, bset)

        free = int((~bset.membership).sum())
        logger.info(f"{self.name} finished with {free} non-bootstrapped pairs")
        return {"policy": policy}
