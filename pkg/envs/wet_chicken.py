"""Wet Chicken: a boat on a river next to a waterfall, with exact discretised turbulence."""

import logging
from typing import Dict, Tuple

import numpy as np

from envs.common import assemble, sparse_transitions
from models import Benchmark, InvalidInputError

logger = logging.getLogger(__name__)

# (a_x, a_y): drift, hold, paddle back, steer right, steer left
ACTIONS = ((0, 0), (-1, 0), (-2, 0), (0, 1), (0, -1))
DRIFT, HOLD, PADDLE_BACK, RIGHT, LEFT = range(5)


def stream(y: int, width: int = 5) -> Tuple[float, float]:
    """Stream velocity v = 3y/width and turbulence b = 3.5 - v."""
    v = y * 3.0 / width
    return v, 3.5 - v


def drift_intervals(x: int, y: int, action: int, width: int = 5) -> Dict[int, Tuple[float, float]]:
    """Turbulence intervals of tau in [-1, 1] leading to each rounded x'.

    x' = round(x + a_x + v + tau * b) before clamping; the probability of an
    outcome is the length of its interval divided by 2.
    """
    a_x, _ = ACTIONS[action]
    v, b = stream(y, width)
    centre = x + a_x + v
    lowest = int(np.floor(centre - b + 0.5))
    highest = int(np.floor(centre + b + 0.5))
    intervals = {}
    for k in range(lowest, highest + 1):
        lo = max(-1.0, (k - 0.5 - centre) / b)
        hi = min(1.0, (k + 0.5 - centre) / b)
        if hi > lo:
            intervals[k] = (lo, hi)
    return intervals


def wet_chicken(
    length: int = 5,
    width: int = 5,
    fall_state: bool = True,
    fall_reward: float = -30.0,
    discount: float = 0.95,
) -> Benchmark:
    """Non-episodic Wet Chicken on a length x width river.

    State x * width + y; x grows toward the waterfall. Rounded x' < 0 clamps
    to 0 and x' >= length is a fall, which resets to (0, 0) with
    ``fall_reward``; otherwise the reward is x'. With ``fall_state`` the fall
    first enters an extra unsafe waterfall state that returns to (0, 0).
    Targets are the cells next to the waterfall.
    """
    if length < 2 or width < 1:
        raise InvalidInputError("river must be at least 2 long and 1 wide")
    A = len(ACTIONS)
    cells = length * width
    S = cells + 1 if fall_state else cells
    waterfall = cells if fall_state else 0

    rows, cols, data, rewards = [], [], [], np.zeros((S, A))
    for x in range(length):
        for y in range(width):
            s = x * width + y
            for action, (_, a_y) in enumerate(ACTIONS):
                y_next = min(max(y + a_y, 0), width - 1)
                for k, (lo, hi) in drift_intervals(x, y, action, width).items():
                    prob = (hi - lo) / 2.0
                    if k >= length:
                        successor, reward = waterfall, fall_reward
                    else:
                        x_next = max(k, 0)
                        successor, reward = x_next * width + y_next, float(x_next)
                    rows.append(s * A + action)
                    cols.append(successor)
                    data.append(prob)
                    rewards[s, action] += prob * reward
    if fall_state:
        for action in range(A):
            rows.append(waterfall * A + action)
            cols.append(0)
            data.append(1.0)

    transitions = sparse_transitions(np.array(rows), np.array(cols), np.array(data), S, A)

    heuristic = np.zeros((S, A))
    for x in range(length):
        choice = DRIFT if x <= 1 else HOLD if x == 2 else PADDLE_BACK
        heuristic[x * width:(x + 1) * width, choice] = 1.0
    if fall_state:
        heuristic[waterfall, DRIFT] = 1.0

    edge = [(length - 1) * width + y for y in range(width)]
    logger.debug(f"Built Wet Chicken with {S} states")
    return assemble(
        "wetchicken",
        transitions,
        rewards,
        np.ones((S, A), dtype=bool),
        heuristic,
        initial_state=0,
        discount=discount,
        target_states=edge,
        unsafe_states=[waterfall] if fall_state else [],
        episodic=False,
    )
