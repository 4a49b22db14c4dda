"""Trajectory sampling from a known MDP under a behaviour policy."""

import logging
from typing import Union

import numpy as np
import scipy.sparse as sp

from mdp_core import check_policy
from models import Dataset, InvalidInputError, Mdp, TabularPolicy, Trajectory

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence]


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Portable counter-based generator (Philox) for a seed or seed sequence."""
    return np.random.Generator(np.random.Philox(seed))


def _row_cumulative(matrix: sp.csr_matrix) -> np.ndarray:
    """Search keys ``row + cumulative probability`` for every stored entry."""
    data = matrix.data
    counts = np.diff(matrix.indptr)
    rows = np.repeat(np.arange(matrix.shape[0]), counts)
    cum = np.cumsum(data)
    starts = matrix.indptr[:-1][counts > 0]
    offsets = np.zeros_like(cum)
    offsets[starts] = cum[starts] - data[starts]
    offsets = np.maximum.accumulate(offsets) if offsets.size else offsets
    within = cum - offsets
    # the last entry of each row closes it exactly
    ends = matrix.indptr[1:][counts > 0] - 1
    within[ends] = 1.0
    return rows + within


class _TransitionSampler:
    """Vectorised sampling of actions and successors."""

    def __init__(self, mdp: Mdp, behavior: TabularPolicy):
        self.num_actions = mdp.num_actions
        self.transitions = mdp.transitions
        self.keys = _row_cumulative(mdp.transitions)
        cum = np.cumsum(behavior.probs, axis=1)
        cum /= cum[:, -1:]
        cum[:, -1] = 1.0
        self.action_cum = cum

    def actions(self, states: np.ndarray, u: np.ndarray) -> np.ndarray:
        return (self.action_cum[states] <= u[:, None]).sum(axis=1)

    def successors(self, rows: np.ndarray, u: np.ndarray) -> np.ndarray:
        positions = np.searchsorted(self.keys, rows + u, side="right")
        positions = np.minimum(positions, self.transitions.indptr[rows + 1] - 1)
        return self.transitions.indices[positions]


def sample_trajectories(
    mdp: Mdp,
    behavior: TabularPolicy,
    budget: int,
    horizon: int,
    seed: SeedLike,
    episodic: bool = True,
) -> Dataset:
    """Collect a dataset by executing ``behavior`` on ``mdp``.

    Episodic MDPs yield ``budget`` trajectories, each stopped when it enters a
    target or unsafe state or after ``horizon`` steps. Non-episodic MDPs yield
    a single continuing trajectory of ``budget`` transitions.
    """
    if budget < 1 or horizon < 1:
        raise InvalidInputError("budget and horizon must be at least 1")
    check_policy(mdp, behavior)

    rng = make_rng(seed)
    sampler = _TransitionSampler(mdp, behavior)
    seed_value = seed if isinstance(seed, (int, np.integer)) else None

    if not episodic:
        states = np.empty(budget + 1, dtype=np.int64)
        actions = np.empty(budget, dtype=np.int64)
        states[0] = mdp.initial_state
        for t in range(budget):
            u = rng.random(2)
            current = states[t:t + 1]
            action = sampler.actions(current, u[:1])
            actions[t] = action[0]
            states[t + 1] = sampler.successors(current * mdp.num_actions + action, u[1:])[0]
        logger.debug(f"Sampled a continuing trajectory of {budget} transitions")
        return Dataset(
            trajectories=[Trajectory(states=states, actions=actions)],
            episodic=False,
            seed=seed_value,
        )

    absorbing = mdp.target_mask | mdp.unsafe_mask
    state_hist = np.zeros((horizon + 1, budget), dtype=np.int64)
    action_hist = np.zeros((horizon, budget), dtype=np.int64)
    lengths = np.zeros(budget, dtype=np.int64)
    current = np.full(budget, mdp.initial_state, dtype=np.int64)
    state_hist[0] = current
    active = np.full(budget, not absorbing[mdp.initial_state])

    for t in range(horizon):
        idx = np.flatnonzero(active)
        if not idx.size:
            break
        actions = sampler.actions(current[idx], rng.random(idx.size))
        nxt = sampler.successors(current[idx] * mdp.num_actions + actions, rng.random(idx.size))
        action_hist[t, idx] = actions
        state_hist[t + 1, idx] = nxt
        lengths[idx] += 1
        current[idx] = nxt
        active[idx] = ~absorbing[nxt]

    trajectories = [
        Trajectory(states=state_hist[: lengths[i] + 1, i], actions=action_hist[: lengths[i], i])
        for i in range(budget)
    ]
    logger.debug(f"Sampled {budget} trajectories with {int(lengths.sum())} transitions")
    return Dataset(trajectories=trajectories, episodic=True, seed=seed_value)
