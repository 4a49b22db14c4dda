"""Small MDPs and datasets shared by the test modules."""

from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp

from envs.frozen_lake import frozen_lake
from models import CountTable, ExperimentConfig, Mdp, TabularPolicy

LAKE_4X4 = ("SFFF", "FHFH", "FFFH", "HFFG")


def dense_mdp(
    P: np.ndarray,
    R: np.ndarray,
    gamma: float = 0.9,
    initial: int = 0,
    targets: Iterable[int] = (),
    unsafe: Iterable[int] = (),
    available: Optional[np.ndarray] = None,
) -> Mdp:
    """Mdp from a dense (S, A, S) transition tensor; pairs with empty rows are unavailable."""
    S, A, _ = P.shape
    if available is None:
        available = P.sum(axis=2) > 0
    return Mdp(
        num_states=S,
        num_actions=A,
        initial_state=initial,
        available=available,
        transitions=sp.csr_matrix(P.reshape(S * A, S)),
        rewards=np.where(available, R, 0.0),
        discount=gamma,
        target_states=frozenset(targets),
        unsafe_states=frozenset(unsafe),
    )


def random_dense_mdp(seed: int, S: int, A: int, gamma: float = 0.9) -> Mdp:
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(S), size=(S, A))
    R = rng.uniform(-1.0, 1.0, size=(S, A))
    return dense_mdp(P, R, gamma)


def self_loop_mdp(S: int, A: int, gamma: float = 0.9) -> Mdp:
    P = np.zeros((S, A, S))
    for s in range(S):
        P[s, :, s] = 1.0
    return dense_mdp(P, np.zeros((S, A)), gamma)


def reach_avoid_mdp(b_to_unsafe: bool = False, gamma: float = 0.9) -> Mdp:
    """State 1 is the target and state 2 is unsafe; both absorb under action 0 only."""
    P = np.zeros((3, 2, 3))
    P[0, 0, 1], P[0, 0, 2] = 0.7, 0.3
    if b_to_unsafe:
        P[0, 1, 1], P[0, 1, 2] = 0.4, 0.6
    else:
        P[0, 1, 1], P[0, 1, 0] = 0.4, 0.6
    P[1, 0, 1] = 1.0
    P[2, 0, 2] = 1.0
    R = np.zeros((3, 2))
    return dense_mdp(P, R, gamma, targets=[1], unsafe=[2])


def exact_counts(mdp: Mdp, per_pair: int) -> CountTable:
    """Counts whose empirical frequencies reproduce T exactly on every available pair."""
    S, A = mdp.num_states, mdp.num_actions
    n_sas = sp.csr_matrix(mdp.transitions.multiply(per_pair))
    n_sas.data = np.rint(n_sas.data)
    n_sas = n_sas.astype(np.int64)
    n_sa = np.asarray(n_sas.sum(axis=1)).reshape(S, A)
    return CountTable(n_sa=n_sa, n_sas=n_sas)


def deterministic_values(mdp: Mdp, actions: np.ndarray) -> np.ndarray:
    """Linear-solve values of a deterministic policy."""
    S, A = mdp.num_states, mdp.num_actions
    P = mdp.transitions.toarray().reshape(S, A, S)
    P_pi = P[np.arange(S), actions]
    r_pi = mdp.rewards[np.arange(S), actions]
    return np.linalg.solve(np.eye(S) - mdp.discount * P_pi, r_pi)


def solve_values(mdp: Mdp, policy: TabularPolicy) -> np.ndarray:
    """Linear-solve values of a stochastic policy."""
    S, A = mdp.num_states, mdp.num_actions
    P = mdp.transitions.toarray().reshape(S, A, S)
    P_pi = np.einsum("sa,sat->st", policy.probs, P)
    r_pi = (policy.probs * mdp.rewards).sum(axis=1)
    return np.linalg.solve(np.eye(S) - mdp.discount * P_pi, r_pi)


def small_lake():
    return frozen_lake(LAKE_4X4, discount=0.95)


def lake_config(**overrides) -> ExperimentConfig:
    values = dict(
        env="frozenlake",
        env_params={"map_spec": list(LAKE_4X4)},
        dataset_sizes=[20],
        runs=1,
        seed=3,
        gamma=0.95,
        n_wedge=3,
        alpha=5.0,
        theta=0.2,
        kappa=0.05,
        nu=0.5,
        duipi_rounds=20,
        horizon=50,
    )
    values.update(overrides)
    return ExperimentConfig(**values)
