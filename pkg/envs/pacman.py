"""Simplified Pacman: reach the goal in a maze while randomly moving ghosts roam."""

import itertools
import logging
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from envs.common import assemble, find_cells, parse_grid, sparse_transitions
from models import Benchmark, InvalidInputError

logger = logging.getLogger(__name__)

UP, RIGHT, DOWN, LEFT = range(4)
MOVES = np.array([(-1, 0), (0, 1), (1, 0), (0, -1)])

# Top row first; the agent starts bottom-left and the goal is top-right.
DEFAULT_MAZE = (
    "...#..G",
    ".#...#.",
    ".##.##.",
    "..#....",
    ".###.#.",
    ".#...#.",
    "S..#.#.",
)


def open_maze(grid_size: int) -> List[str]:
    """Wall-free square maze with the start bottom-left and the goal top-right."""
    rows = [["."] * grid_size for _ in range(grid_size)]
    rows[grid_size - 1][0] = "S"
    rows[0][grid_size - 1] = "G"
    return ["".join(row) for row in rows]


def _neighbours(open_cells: np.ndarray, n_rows: int, n_cols: int) -> np.ndarray:
    """(N, 4) successor cell per move, -1 when the move leaves the maze or hits a wall."""
    cells = np.arange(n_rows * n_cols)
    r, c = np.divmod(cells, n_cols)
    result = np.full((cells.size, len(MOVES)), -1)
    for move, (dr, dc) in enumerate(MOVES):
        nr, nc = r + dr, c + dc
        inside = (nr >= 0) & (nr < n_rows) & (nc >= 0) & (nc < n_cols)
        target = np.where(inside, nr * n_cols + nc, 0)
        result[:, move] = np.where(inside & open_cells[target], target, -1)
    return result


def _check_connected(open_cells: np.ndarray, neighbours: np.ndarray) -> None:
    cells = np.flatnonzero(open_cells)
    index = {cell: i for i, cell in enumerate(cells)}
    rows, cols = [], []
    for cell in cells:
        for nxt in neighbours[cell]:
            if nxt >= 0:
                rows.append(index[cell])
                cols.append(index[int(nxt)])
    graph = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(cells.size, cells.size))
    count, _ = connected_components(graph, directed=False)
    if count != 1:
        raise InvalidInputError(f"maze is not connected ({count} components)")


def pacman(
    grid_size: int = 7,
    num_ghosts: int = 2,
    maze_spec: Optional[Sequence[str]] = None,
    ghost_starts: Optional[Sequence[int]] = None,
    goal_reward: float = 1.0,
    eaten_reward: float = -1.0,
    discount: float = 0.95,
) -> Benchmark:
    """Product MDP over the cells of the agent and every ghost.

    Wall cells are part of the state space but unreachable. Bumping into a
    wall or the border sends the agent back to the start. Each ghost moves
    uniformly over its legal moves and stays put when it has none. Sharing a
    cell with a ghost after a step is absorbing and unsafe; reaching the goal
    cell without a ghost on it is absorbing and a target.
    """
    if grid_size < 3 or num_ghosts < 0:
        raise InvalidInputError("Pacman needs grid_size >= 3 and a nonnegative ghost count")
    if maze_spec is None:
        maze_spec = DEFAULT_MAZE if grid_size == 7 else open_maze(grid_size)
    grid = parse_grid(maze_spec, "SG#.")
    starts, goals = find_cells(grid, "S"), find_cells(grid, "G")
    if len(starts) != 1 or len(goals) != 1:
        raise InvalidInputError("maze needs exactly one start and one goal")

    n_rows, n_cols = len(grid), len(grid[0])
    N = n_rows * n_cols
    open_cells = np.array([char != "#" for row in grid for char in row])
    neighbours = _neighbours(open_cells, n_rows, n_cols)
    _check_connected(open_cells, neighbours)
    start = starts[0][0] * n_cols + starts[0][1]
    goal = goals[0][0] * n_cols + goals[0][1]

    if ghost_starts is None:
        centre = (n_rows // 2) * n_cols + n_cols // 2
        candidates = [goal, centre] + list(range(N))
        ghost_starts = [c for c in dict.fromkeys(candidates) if open_cells[c] and c != start][:num_ghosts]
    ghost_starts = [int(c) for c in ghost_starts]
    if len(ghost_starts) != num_ghosts or any(not open_cells[c] or c == start for c in ghost_starts):
        raise InvalidInputError("ghosts must start on open cells other than the agent's start")

    entities = num_ghosts + 1
    S, A = N ** entities, len(MOVES)
    radix = N ** np.arange(entities - 1, -1, -1)
    states = np.arange(S)
    positions = (states[:, None] // radix[None, :]) % N
    agent = positions[:, 0]
    ghosts = positions[:, 1:]

    valid = open_cells[positions].all(axis=1)
    eaten = valid & (ghosts == agent[:, None]).any(axis=1)
    reached = valid & (agent == goal) & ~eaten
    live = valid & ~eaten & ~reached

    # ghost move table: legal successors with uniform probability
    legal = neighbours >= 0
    n_legal = legal.sum(axis=1)
    ghost_next = np.where(legal, neighbours, np.arange(N)[:, None])
    ghost_prob = np.where(legal, 1.0 / np.maximum(n_legal, 1)[:, None], 0.0)
    stuck = n_legal == 0
    ghost_next[stuck, 0] = np.flatnonzero(stuck)
    ghost_prob[stuck, 0] = 1.0

    live_states = np.flatnonzero(live)
    live_agent = agent[live_states]
    live_ghosts = ghosts[live_states]
    agent_next = np.where(neighbours[live_agent] >= 0, neighbours[live_agent], start)

    rows, cols, data, reward_terms = [], [], [], []
    for combo in itertools.product(range(len(MOVES)), repeat=num_ghosts):
        prob = np.ones(live_states.size)
        moved = np.empty_like(live_ghosts)
        for i, k in enumerate(combo):
            prob = prob * ghost_prob[live_ghosts[:, i], k]
            moved[:, i] = ghost_next[live_ghosts[:, i], k]
        keep = prob > 0.0
        if not keep.any():
            continue
        ghost_code = (moved[keep] * radix[None, 1:]).sum(axis=1) if num_ghosts else 0
        for action in range(A):
            nxt_agent = agent_next[keep, action]
            collided = (moved[keep] == nxt_agent[:, None]).any(axis=1)
            rows.append(live_states[keep] * A + action)
            cols.append(nxt_agent * radix[0] + ghost_code)
            data.append(prob[keep])
            reward = np.where(collided, eaten_reward, np.where(nxt_agent == goal, goal_reward, 0.0))
            reward_terms.append(prob[keep] * reward)

    still = np.flatnonzero(~live)
    rows.append(still * A)
    cols.append(still)
    data.append(np.ones(still.size))
    reward_terms.append(np.zeros(still.size))

    all_rows = np.concatenate(rows)
    transitions = sparse_transitions(all_rows, np.concatenate(cols), np.concatenate(data), S, A)
    rewards = np.bincount(all_rows, weights=np.concatenate(reward_terms), minlength=S * A).reshape(S, A)

    available = np.zeros((S, A), dtype=bool)
    available[live] = True
    available[~live, UP] = True

    # up and right with equal probability, never into a wall
    heuristic = np.zeros((S, A))
    heuristic[~live, UP] = 1.0
    no_bump = neighbours[live_agent] >= 0
    preferred = no_bump[:, [UP, RIGHT]]
    fallback = np.where(preferred.any(axis=1, keepdims=True), 0.0, no_bump.astype(float))
    weights = fallback.copy()
    weights[:, UP] += preferred[:, 0]
    weights[:, RIGHT] += preferred[:, 1]
    empty = weights.sum(axis=1) == 0.0
    weights[empty] = 1.0
    heuristic[live_states] = weights / weights.sum(axis=1, keepdims=True)

    initial = int(start * radix[0] + sum(c * r for c, r in zip(ghost_starts, radix[1:])))
    logger.debug(f"Built Pacman with {S} states and {transitions.nnz} transitions")
    return assemble(
        "pacman",
        transitions,
        rewards,
        available,
        heuristic,
        initial_state=initial,
        discount=discount,
        target_states=np.flatnonzero(reached),
        unsafe_states=np.flatnonzero(eaten),
    )
