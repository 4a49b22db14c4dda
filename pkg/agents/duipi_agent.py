"""DUIPI Agent: uncertainty-penalised policy iteration with Dirichlet model uncertainty."""

import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from config import DUIPI_ROUNDS, MAX_VALUE_ITERATIONS, VALUE_TOL
from data_sources.estimators import as_mdp, dirichlet_mean_model
from mdp_core import check_policy, policy_evaluation, stop_threshold
from models import (
    ConvergenceError,
    CountTable,
    InvalidInputError,
    Mdp,
    Method,
    RunState,
    Shield,
    TabularPolicy,
    TransitionGraph,
    UncertainValueTable,
)

logger = logging.getLogger(__name__)

# Penalised value of shield-disallowed or unavailable pairs.
EXCLUDED_VALUE = np.finfo(float).min


def dirichlet_transition_variance(counts: CountTable, graph: TransitionGraph, alpha: float) -> sp.csr_matrix:
    """Marginal variances of the Dirichlet posterior over each pair's successors.

    With a_i = alpha + n(s,a,s_i) and a0 = sum_j a_j the variance of entry i is
    a_i (a0 - a_i) / (a0^2 (a0 + 1)). The result shares the graph's pattern.
    """
    if alpha <= 0.0:
        raise InvalidInputError(f"Dirichlet prior needs alpha > 0, got {alpha}")
    if counts.n_sa.shape != (graph.num_states, graph.num_actions):
        raise InvalidInputError("count table does not match the transition graph")
    a = alpha + graph.gather(counts.n_sas).astype(float)
    rows = graph.row_ids
    a0 = np.bincount(rows, weights=a, minlength=graph.num_states * graph.num_actions)[rows]
    return graph.matrix(a * (a0 - a) / (a0 ** 2 * (a0 + 1.0)))


def duipi_variance_step(
    mdp: Mdp,
    trans_var: sp.csr_matrix,
    v: np.ndarray,
    var_v: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """One application of the Bellman operator and its diagonal variance propagation.

    Var Q(s,a) = sum_s' gamma^2 T(s'|s,a)^2 Var V(s')
               + sum_s' (R(s,a) + gamma V(s'))^2 Var T(s'|s,a).
    Rewards are known, so they contribute no variance of their own.
    """
    S, A = mdp.num_states, mdp.num_actions
    gamma = mdp.discount
    T = mdp.transitions
    r = mdp.rewards.ravel()

    q = r + gamma * (T @ v)
    first = gamma ** 2 * (T.multiply(T) @ var_v)
    var_rows = np.asarray(trans_var.sum(axis=1)).ravel()
    second = r ** 2 * var_rows + 2.0 * gamma * r * (trans_var @ v) + gamma ** 2 * (trans_var @ (v * v))
    var_q = np.maximum(np.asarray(first).ravel() + second, 0.0)
    return q.reshape(S, A), var_q.reshape(S, A)


def uncertain_values(
    mdp: Mdp,
    trans_var: sp.csr_matrix,
    policy: TabularPolicy,
    nu: float,
    allowed: Optional[np.ndarray] = None,
    tol: float = VALUE_TOL,
    max_iter: int = MAX_VALUE_ITERATIONS,
    initial: Optional[np.ndarray] = None,
) -> UncertainValueTable:
    """Values, diagonal variances and penalised values U = Q - nu sqrt(Var Q) of a policy."""
    if nu < 0.0:
        raise InvalidInputError(f"nu must be nonnegative, got {nu}")
    values = policy_evaluation(mdp, policy, tol, max_iter, initial=initial)
    v = values.v
    weights = policy.probs ** 2
    threshold = stop_threshold(tol, mdp.discount)

    var_v = np.zeros(mdp.num_states)
    delta = np.inf
    for iteration in range(1, max_iter + 1):
        _, var_q = duipi_variance_step(mdp, trans_var, v, var_v)
        var_v_new = (weights * var_q).sum(axis=1)
        delta = float(np.max(np.abs(var_v_new - var_v)))
        var_v = var_v_new
        if delta <= threshold:
            break
    else:
        raise ConvergenceError("variance propagation did not converge", delta, max_iter)

    q, var_q = duipi_variance_step(mdp, trans_var, v, var_v)
    u = q - nu * np.sqrt(var_q)
    mask = mdp.available if allowed is None else (mdp.available & allowed)
    u = np.where(mask, u, EXCLUDED_VALUE)
    return UncertainValueTable(q=q, var_q=var_q, v=v, var_v=var_v, u=u)


def incremental_update(policy: np.ndarray, best: np.ndarray, t: int) -> np.ndarray:
    """Move 1/t probability onto ``best`` and scale the other actions down.

    Rows already deterministic on their best action are left unchanged.
    """
    states = np.arange(policy.shape[0])
    p = policy[states, best]
    step = 1.0 / t
    movable = p < 1.0
    scale = np.ones_like(p)
    scale[movable] = np.maximum(1.0 - p[movable] - step, 0.0) / (1.0 - p[movable])
    updated = policy * scale[:, None]
    updated[states, best] = np.where(movable, np.minimum(p + step, 1.0), p)
    return updated


def duipi(
    mdp: Mdp,
    trans_var: sp.csr_matrix,
    baseline: TabularPolicy,
    nu: float,
    rounds: int = DUIPI_ROUNDS,
    shield: Optional[Shield] = None,
    tol: float = VALUE_TOL,
) -> TabularPolicy:
    """Diagonal uncertainty-penalised policy iteration starting from ``baseline``.

    With a shield the penalised value of every disallowed pair is the most
    negative float, so those actions are never promoted.
    """
    if rounds < 1:
        raise InvalidInputError("DUIPI needs at least one round")
    check_policy(mdp, baseline)
    allowed = None if shield is None else shield.allowed

    probs = np.array(baseline.probs)
    warm = None
    for t in range(1, rounds + 1):
        table = uncertain_values(mdp, trans_var, TabularPolicy(probs=probs), nu, allowed, tol, initial=warm)
        warm = table.v
        best = np.argmax(table.u, axis=1)
        probs = incremental_update(probs, best, t)

    logger.debug(f"DUIPI finished {rounds} rounds")
    return TabularPolicy(probs=probs)


class DuipiAgent:
    """Agent responsible for DUIPI and shielded DUIPI."""

    def __init__(self):
        """Initialize the DUIPI Agent."""
        self.name = "DUIPI Agent"
        logger.info(f"Initialized {self.name}")

    def improve(self, state: RunState) -> Dict[str, Any]:
        """
        Run (shielded) DUIPI on the Dirichlet posterior of the run's counts.

        Args:
            state: Run state holding counts, the estimated baseline and, for
                duipi_shield, the shield and shielded baseline

        Returns:
            Update with the improved policy
        """
        config = state.config
        benchmark = state.benchmark
        logger.info(f"{self.name} running {config.duipi_rounds} rounds with nu={config.nu}")

        point = dirichlet_mean_model(state.counts, benchmark.graph, config.alpha)
        mdp = as_mdp(benchmark.mdp, point)
        trans_var = dirichlet_transition_variance(state.counts, benchmark.graph, config.alpha)

        if state.method == Method.DUIPI_SHIELD:
            policy = duipi(mdp, trans_var, state.shielded_baseline, config.nu, config.duipi_rounds, state.shield)
        else:
            policy = duipi(mdp, trans_var, state.baseline, config.nu, config.duipi_rounds)

        logger.info(f"{self.name} finished")
        return {"policy": policy}
