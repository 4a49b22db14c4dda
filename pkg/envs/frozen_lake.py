"""Slippery Frozen Lake grid with holes."""

import logging
from typing import Optional, Sequence

import numpy as np

from envs.common import assemble, expected_rewards, find_cells, parse_grid, sparse_transitions
from models import Benchmark, InvalidInputError

logger = logging.getLogger(__name__)

LEFT, DOWN, RIGHT, UP = range(4)
MOVES = np.array([(0, -1), (1, 0), (0, 1), (-1, 0)])

DEFAULT_MAP = (
    "SFFFFFFF",
    "FFFFFFFF",
    "FFFHFFFF",
    "FFFFFHFF",
    "FFFHFFFF",
    "FHHFFFHF",
    "FHFFHFHF",
    "FFFHFFFG",
)


def frozen_lake(
    map_spec: Optional[Sequence[str]] = None,
    slip_intended: float = 1.0 / 3.0,
    goal_reward: float = 1.0,
    hole_reward: float = -1.0,
    discount: float = 0.95,
) -> Benchmark:
    """Frozen Lake with slippery moves.

    The intended direction is taken with probability ``slip_intended`` and
    each perpendicular direction with half the remainder; moves off the grid
    keep the position. Goal and holes are absorbing with a single action.
    """
    grid = parse_grid(map_spec or DEFAULT_MAP, "SFGH.")
    if not 0.0 <= slip_intended <= 1.0:
        raise InvalidInputError(f"slip_intended must lie in [0, 1], got {slip_intended}")
    starts, goals = find_cells(grid, "S"), find_cells(grid, "G")
    if len(starts) != 1 or not goals:
        raise InvalidInputError("map needs exactly one start and at least one goal")

    n_rows, n_cols = len(grid), len(grid[0])
    S, A = n_rows * n_cols, len(MOVES)
    kind = np.array([char for row in grid for char in row])
    goal = kind == "G"
    hole = kind == "H"
    terminal = goal | hole

    cells = np.arange(S)
    r, c = np.divmod(cells, n_cols)

    def step(direction: int) -> np.ndarray:
        nr = r + MOVES[direction, 0]
        nc = c + MOVES[direction, 1]
        inside = (nr >= 0) & (nr < n_rows) & (nc >= 0) & (nc < n_cols)
        return np.where(inside, nr * n_cols + nc, cells)

    slip = (1.0 - slip_intended) / 2.0
    rows, cols, data = [], [], []
    live = cells[~terminal]
    for action in range(A):
        for direction, prob in (((action - 1) % A, slip), (action, slip_intended), ((action + 1) % A, slip)):
            rows.append(live * A + action)
            cols.append(step(direction)[live])
            data.append(np.full(live.size, prob))
    dead = cells[terminal]
    rows.append(dead * A)
    cols.append(dead)
    data.append(np.ones(dead.size))

    transitions = sparse_transitions(np.concatenate(rows), np.concatenate(cols), np.concatenate(data), S, A)
    entering = np.where(goal, goal_reward, np.where(hole, hole_reward, 0.0))
    rewards = expected_rewards(transitions, entering, S, A)

    available = np.zeros((S, A), dtype=bool)
    available[~terminal] = True
    available[terminal, LEFT] = True
    rewards = np.where(available, rewards, 0.0)
    rewards[terminal] = 0.0

    heuristic = np.zeros((S, A))
    heuristic[~terminal, DOWN] = 0.5
    heuristic[~terminal, RIGHT] = 0.5
    heuristic[terminal, LEFT] = 1.0

    start_row, start_col = starts[0]
    logger.debug(f"Built Frozen Lake with {S} states and {int(hole.sum())} holes")
    return assemble(
        "frozenlake",
        transitions,
        rewards,
        available,
        heuristic,
        initial_state=start_row * n_cols + start_col,
        discount=discount,
        target_states=np.flatnonzero(goal),
        unsafe_states=np.flatnonzero(hole),
    )
