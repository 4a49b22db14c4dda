"""Helpers shared by the benchmark constructors."""

from typing import List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from models import Benchmark, InvalidInputError, Mdp, TabularPolicy, TransitionGraph


def sparse_transitions(
    rows: np.ndarray,
    cols: np.ndarray,
    data: np.ndarray,
    num_states: int,
    num_actions: int,
) -> sp.csr_matrix:
    """(S*A, S) CSR matrix from triplets; duplicates are summed, zeros dropped."""
    matrix = sp.coo_matrix(
        (np.asarray(data, dtype=float), (np.asarray(rows), np.asarray(cols))),
        shape=(num_states * num_actions, num_states),
    ).tocsr()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return matrix


def expected_rewards(transitions: sp.csr_matrix, entering: np.ndarray, num_states: int, num_actions: int) -> np.ndarray:
    """R(s, a) = sum_s' T(s'|s, a) * entering[s']."""
    return (transitions @ entering).reshape(num_states, num_actions)


def parse_grid(lines: Sequence[str], alphabet: str) -> List[str]:
    """Validate an ASCII grid: rectangular, nonempty, only characters from ``alphabet``."""
    grid = [line.strip() for line in lines if line.strip()]
    if not grid:
        raise InvalidInputError("grid map is empty")
    width = len(grid[0])
    if any(len(row) != width for row in grid):
        raise InvalidInputError("grid map rows must have equal length")
    unknown = set("".join(grid)) - set(alphabet)
    if unknown:
        raise InvalidInputError(f"grid map contains unknown characters {sorted(unknown)}")
    return grid


def find_cells(grid: Sequence[str], symbol: str) -> List[Tuple[int, int]]:
    return [(r, c) for r, row in enumerate(grid) for c, char in enumerate(row) if char == symbol]


def assemble(
    name: str,
    transitions: sp.csr_matrix,
    rewards: np.ndarray,
    available: np.ndarray,
    heuristic: np.ndarray,
    initial_state: int,
    discount: float,
    target_states,
    unsafe_states,
    episodic: bool = True,
) -> Benchmark:
    """Validated Benchmark whose graph is the support of ``transitions``."""
    num_states, num_actions = available.shape
    mdp = Mdp(
        num_states=num_states,
        num_actions=num_actions,
        initial_state=initial_state,
        available=available,
        transitions=transitions,
        rewards=rewards,
        discount=discount,
        target_states=frozenset(int(s) for s in target_states),
        unsafe_states=frozenset(int(s) for s in unsafe_states),
    )
    return Benchmark(
        name=name,
        mdp=mdp,
        heuristic=TabularPolicy(probs=heuristic),
        graph=TransitionGraph.from_matrix(mdp.transitions),
        episodic=episodic,
    )
