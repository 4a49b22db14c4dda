"""Randomly generated MDPs with a goal and reachable trap states."""

import logging
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order

from config import GENERATION_RETRIES
from data_sources.trajectory_sampler import SeedLike, make_rng
from envs.common import assemble, expected_rewards, sparse_transitions
from mdp_core import optimal_policy
from models import Benchmark, GenerationError, InvalidInputError, Mdp

logger = logging.getLogger(__name__)


def _reachable(transitions, num_states: int, num_actions: int, start: int) -> np.ndarray:
    adjacency = transitions.tocoo()
    edges = (adjacency.row // num_actions, adjacency.col)
    state_graph = sp.csr_matrix((np.ones(edges[0].size), edges), shape=(num_states, num_states))
    order = breadth_first_order(state_graph, start, directed=True, return_predecessors=False)
    mask = np.zeros(num_states, dtype=bool)
    mask[order] = True
    return mask


def _with_sinks(
    successors: np.ndarray,
    probs: np.ndarray,
    sinks: np.ndarray,
    entering: np.ndarray,
    discount: float,
    target: int,
    traps: np.ndarray,
) -> Mdp:
    S, A, k = successors.shape
    is_sink = np.zeros(S, dtype=bool)
    is_sink[sinks] = True
    live = np.flatnonzero(~is_sink)

    rows = (live[:, None, None] * A + np.arange(A)[None, :, None]) * np.ones((1, 1, k), dtype=int)
    rows = np.concatenate([rows.ravel(), sinks * A])
    cols = np.concatenate([successors[live].ravel(), sinks])
    data = np.concatenate([probs[live].ravel(), np.ones(sinks.size)])
    transitions = sparse_transitions(rows, cols, data, S, A)

    available = np.ones((S, A), dtype=bool)
    available[is_sink] = False
    available[is_sink, 0] = True
    rewards = np.where(available, expected_rewards(transitions, entering, S, A), 0.0)
    rewards[is_sink] = 0.0
    return Mdp(
        num_states=S,
        num_actions=A,
        initial_state=0,
        available=available,
        transitions=transitions,
        rewards=rewards,
        discount=discount,
        target_states=frozenset([int(target)]),
        unsafe_states=frozenset(int(t) for t in traps),
    )


def random_mdps(
    num_states: int = 50,
    num_actions: int = 4,
    branching: int = 4,
    num_traps: int = 5,
    seed: Optional[SeedLike] = 0,
    goal_reward: float = 1.0,
    trap_reward: float = -1.0,
    discount: float = 0.95,
) -> Benchmark:
    """Random MDP starting in state 0 with one goal and ``num_traps`` traps.

    Every (s, a) leads to ``branching`` distinct states with Dirichlet(1)
    probabilities. Traps are sinks reachable from the start; the goal is the
    reachable candidate that minimises the optimal value at the start. The
    heuristic policy is the optimal policy of the generated MDP.
    """
    if branching < 1 or branching > num_states:
        raise InvalidInputError(f"branching must lie in [1, {num_states}], got {branching}")
    if num_traps < 0 or num_traps + 2 > num_states:
        raise InvalidInputError(f"cannot place {num_traps} traps among {num_states} states")

    rng = make_rng(0 if seed is None else seed)
    S, A = num_states, num_actions
    for attempt in range(1, GENERATION_RETRIES + 1):
        successors = np.stack([
            np.stack([rng.choice(S, size=branching, replace=False) for _ in range(A)])
            for _ in range(S)
        ])
        probs = rng.dirichlet(np.ones(branching), size=(S, A))

        free = _with_sinks(successors, probs, np.zeros(0, dtype=int), np.zeros(S), discount, 1, [])
        reachable = _reachable(free.transitions, S, A, 0)
        reachable[0] = False
        candidates = np.flatnonzero(reachable)
        if candidates.size < num_traps + 1:
            continue

        traps = np.sort(rng.choice(candidates, size=num_traps, replace=False))
        best = None
        for goal in candidates[~np.isin(candidates, traps)]:
            entering = np.zeros(S)
            entering[goal] = goal_reward
            entering[traps] = trap_reward
            sinks = np.append(traps, goal)
            mdp = _with_sinks(successors, probs, sinks, entering, discount, goal, traps)
            reach = _reachable(mdp.transitions, S, A, 0)
            if not reach[sinks].all():
                continue
            policy, values = optimal_policy(mdp)
            value = values.v[0]
            if best is None or value < best[0]:
                best = (value, mdp, policy)

        if best is None:
            continue
        _, mdp, policy = best
        logger.debug(f"Generated random MDP after {attempt} attempts")
        return assemble(
            "random",
            mdp.transitions,
            mdp.rewards,
            mdp.available,
            policy.probs,
            initial_state=0,
            discount=discount,
            target_states=mdp.target_states,
            unsafe_states=mdp.unsafe_states,
        )

    raise GenerationError(f"no random MDP with {num_traps} reachable traps after {GENERATION_RETRIES} attempts")
