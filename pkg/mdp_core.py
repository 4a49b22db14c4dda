"""Exact policy evaluation, optimal control and reach-avoid probabilities on known MDPs."""

import logging
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp

from config import MAX_VALUE_ITERATIONS, SPIBB_MAX_ROUNDS, VALUE_TOL
from models import (
    ConvergenceError,
    InvalidInputError,
    Mdp,
    ReachAvoidTable,
    TabularPolicy,
    ValueTable,
)

logger = logging.getLogger(__name__)


def check_policy(mdp: Mdp, policy: TabularPolicy) -> None:
    """Raise InvalidInputError unless supp(policy(s)) is within A(s) for every s."""
    if policy.probs.shape != (mdp.num_states, mdp.num_actions):
        raise InvalidInputError(
            f"policy shape {policy.probs.shape} does not match MDP {(mdp.num_states, mdp.num_actions)}"
        )
    outside = (policy.probs > 0.0) & ~mdp.available
    if outside.any():
        states = np.flatnonzero(outside.any(axis=1))
        raise InvalidInputError(f"policy uses unavailable actions at states {states[:10].tolist()}")


def uniform_policy(mdp: Mdp) -> TabularPolicy:
    """Uniform distribution over A(s) in every state."""
    available = mdp.available.astype(float)
    return TabularPolicy(probs=available / available.sum(axis=1, keepdims=True))


def deterministic_policy(mdp: Mdp, actions: np.ndarray) -> TabularPolicy:
    probs = np.zeros((mdp.num_states, mdp.num_actions))
    probs[np.arange(mdp.num_states), actions] = 1.0
    return TabularPolicy(probs=probs)


def masked_q(mdp: Mdp, q: np.ndarray) -> np.ndarray:
    """Action values with unavailable actions set to -inf."""
    return np.where(mdp.available, q, -np.inf)


def greedy_actions(mdp: Mdp, q: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Lowest-index action whose value is within tol of the best available one."""
    values = masked_q(mdp, q)
    best = values.max(axis=1, keepdims=True)
    return np.argmax(values >= best - tol, axis=1)


def greedy_policy(mdp: Mdp, q: np.ndarray, tol: float = 0.0) -> TabularPolicy:
    return deterministic_policy(mdp, greedy_actions(mdp, q, tol))


def policy_matrix(mdp: Mdp, probs: np.ndarray) -> sp.csr_matrix:
    """(S, S*A) matrix that averages (s, a) rows under the policy."""
    S, A = mdp.num_states, mdp.num_actions
    rows = np.repeat(np.arange(S), A)
    return sp.csr_matrix((probs.ravel(), (rows, np.arange(S * A))), shape=(S, S * A))


def stop_threshold(tol: float, gamma: float) -> float:
    # successive-change bound that keeps the fixed-point error below tol
    return tol * (1.0 - gamma) / gamma if gamma > 0.0 else tol


def action_values(mdp: Mdp, v: np.ndarray) -> np.ndarray:
    """q(s, a) = R(s, a) + gamma * sum_s' T(s'|s, a) v(s')."""
    successor = (mdp.transitions @ v).reshape(mdp.num_states, mdp.num_actions)
    return mdp.rewards + mdp.discount * successor


def policy_evaluation(
    mdp: Mdp,
    policy: TabularPolicy,
    tol: float = VALUE_TOL,
    max_iter: int = MAX_VALUE_ITERATIONS,
    initial: Optional[np.ndarray] = None,
) -> ValueTable:
    """Fixed point of the Bellman equation of ``policy`` within tol in sup-norm.

    ``initial`` warm-starts the sweeps, e.g. from the previous policy's values.
    """
    if tol <= 0.0:
        raise InvalidInputError("tol must be positive")
    check_policy(mdp, policy)

    p_pi = policy_matrix(mdp, policy.probs) @ mdp.transitions
    r_pi = (policy.probs * mdp.rewards).sum(axis=1)
    gamma = mdp.discount
    threshold = stop_threshold(tol, gamma)

    v = np.zeros(mdp.num_states) if initial is None else np.array(initial, dtype=float)
    delta = np.inf
    for iteration in range(1, max_iter + 1):
        v_new = r_pi + gamma * (p_pi @ v)
        delta = float(np.max(np.abs(v_new - v)))
        v = v_new
        if delta <= threshold:
            break
    else:
        raise ConvergenceError("policy evaluation did not converge", delta, max_iter)

    logger.debug(f"Policy evaluation converged after {iteration} sweeps")
    return ValueTable(v=v, q=action_values(mdp, v))


def performance(mdp: Mdp, policy: TabularPolicy, tol: float = VALUE_TOL) -> float:
    """Expected discounted return rho(pi, M) from the initial state."""
    return float(policy_evaluation(mdp, policy, tol).v[mdp.initial_state])


def bellman_residual(mdp: Mdp, policy: TabularPolicy, values: ValueTable) -> float:
    """Sup-norm residual of the policy's Bellman equation at ``values.v``."""
    backup = (policy.probs * action_values(mdp, values.v)).sum(axis=1)
    return float(np.max(np.abs(backup - values.v)))


def optimal_policy(
    mdp: Mdp,
    tol: float = VALUE_TOL,
    max_rounds: int = SPIBB_MAX_ROUNDS,
) -> Tuple[TabularPolicy, ValueTable]:
    """Deterministic optimal policy via policy iteration.

    An action only replaces the incumbent when it improves q by more than
    tol; the returned policy takes the lowest-index action within tol of the
    maximum in every state.
    """
    if tol <= 0.0:
        raise InvalidInputError("tol must be positive")

    actions = np.argmax(mdp.available, axis=1)
    states = np.arange(mdp.num_states)
    warm = None
    for round_index in range(1, max_rounds + 1):
        values = policy_evaluation(mdp, deterministic_policy(mdp, actions), tol, initial=warm)
        warm = values.v
        q = masked_q(mdp, values.q)
        improve = q.max(axis=1) > q[states, actions] + tol
        if not improve.any():
            break
        actions = np.where(improve, np.argmax(q, axis=1), actions)
    else:
        raise ConvergenceError("policy iteration did not stabilise", float("nan"), max_rounds)

    logger.debug(f"Policy iteration stabilised after {round_index} rounds")
    final = greedy_actions(mdp, values.q, tol)
    policy = deterministic_policy(mdp, final)
    if not np.array_equal(final, actions):
        values = policy_evaluation(mdp, policy, tol)
    return policy, values


def exact_reach_avoid(
    mdp: Mdp,
    tol: float = VALUE_TOL,
    max_iter: int = MAX_VALUE_ITERATIONS,
) -> ReachAvoidTable:
    """Maximal probability of reaching S_T without visiting S_U first.

    Undiscounted value iteration from the zero vector, so states that cannot
    reach S_T converge to 0 (least fixed point).
    """
    S, A = mdp.num_states, mdp.num_actions
    available = mdp.available
    target, unsafe = mdp.target_mask, mdp.unsafe_mask

    v = target.astype(float)
    delta = np.inf
    for iteration in range(1, max_iter + 1):
        q = (mdp.transitions @ v).reshape(S, A)
        v_new = np.where(available, q, -np.inf).max(axis=1)
        v_new[target] = 1.0
        v_new[unsafe] = 0.0
        delta = float(np.max(np.abs(v_new - v)))
        v = v_new
        if delta <= tol:
            break
    else:
        raise ConvergenceError("reach-avoid value iteration did not converge", delta, max_iter)

    logger.debug(f"Reach-avoid iteration converged after {iteration} sweeps")
    q = (mdp.transitions @ v).reshape(S, A)
    q[target] = 1.0
    q[unsafe] = 0.0
    q[~available] = 0.0
    return ReachAvoidTable(v=np.clip(v, 0.0, 1.0), q=np.clip(q, 0.0, 1.0))
