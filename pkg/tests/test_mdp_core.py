import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdp_core import (
    bellman_residual,
    deterministic_policy,
    exact_reach_avoid,
    greedy_actions,
    optimal_policy,
    performance,
    policy_evaluation,
    uniform_policy,
)
from models import ConvergenceError, InvalidInputError, TabularPolicy
from tests.helpers import dense_mdp, deterministic_values, random_dense_mdp, self_loop_mdp, solve_values


def test_self_loop_with_unit_reward_is_geometric_series() -> None:
    mdp = dense_mdp(np.ones((1, 1, 1)), np.ones((1, 1)), gamma=0.95)
    policy = TabularPolicy(probs=[[1.0]])
    assert performance(mdp, policy) == pytest.approx(20.0, abs=1e-6)


def test_zero_rewards_give_zero_values() -> None:
    mdp = self_loop_mdp(3, 2)
    values = policy_evaluation(mdp, uniform_policy(mdp))
    assert np.all(values.v == 0.0)
    assert performance(mdp, uniform_policy(mdp)) == 0.0


@given(seed=st.integers(0, 10_000), S=st.integers(2, 6), A=st.integers(1, 3))
def test_policy_evaluation_matches_linear_solve(seed, S, A) -> None:
    mdp = random_dense_mdp(seed, S, A)
    rng = np.random.default_rng(seed + 1)
    policy = TabularPolicy(probs=rng.dirichlet(np.ones(A), size=S))

    values = policy_evaluation(mdp, policy, tol=1e-9)

    np.testing.assert_allclose(values.v, solve_values(mdp, policy), atol=1e-7)
    assert bellman_residual(mdp, policy, values) <= 1e-8
    P = mdp.transitions.toarray().reshape(S, A, S)
    np.testing.assert_allclose(values.q, mdp.rewards + mdp.discount * P @ values.v, atol=1e-9)


def test_warm_start_reaches_the_same_fixed_point() -> None:
    mdp = random_dense_mdp(7, 4, 2)
    policy = uniform_policy(mdp)
    cold = policy_evaluation(mdp, policy)
    warm = policy_evaluation(mdp, policy, initial=cold.v + 1.0)
    np.testing.assert_allclose(warm.v, cold.v, atol=1e-7)


def test_policy_using_unavailable_action_is_rejected(reach_mdp) -> None:
    probs = np.zeros((3, 2))
    probs[:, 1] = 1.0
    with pytest.raises(InvalidInputError):
        policy_evaluation(reach_mdp, TabularPolicy(probs=probs))


def test_nonpositive_tolerance_is_rejected(reach_mdp) -> None:
    with pytest.raises(InvalidInputError):
        policy_evaluation(reach_mdp, uniform_policy(reach_mdp), tol=0.0)


def test_iteration_budget_exhaustion_raises_convergence_error() -> None:
    mdp = dense_mdp(np.ones((1, 1, 1)), np.ones((1, 1)), gamma=0.95)
    with pytest.raises(ConvergenceError) as info:
        policy_evaluation(mdp, TabularPolicy(probs=[[1.0]]), max_iter=3)
    assert info.value.iterations == 3
    assert info.value.residual > 0.0


def test_dominant_action_is_chosen_everywhere() -> None:
    S, A = 3, 2
    P = np.zeros((S, A, S))
    for s in range(S):
        P[s, :, (s + 1) % S] = 1.0
    R = np.tile([0.0, 1.0], (S, 1))
    policy, _ = optimal_policy(dense_mdp(P, R))
    np.testing.assert_array_equal(policy.probs[:, 1], 1.0)


def test_optimal_policy_avoids_trap() -> None:
    # state 0: action 0 stays with reward 0.1, action 1 enters the trap with reward -10
    P = np.zeros((2, 2, 2))
    P[0, 0, 0] = 1.0
    P[0, 1, 1] = 1.0
    P[1, :, 1] = 1.0
    R = np.array([[0.1, -10.0], [0.0, 0.0]])
    policy, values = optimal_policy(dense_mdp(P, R))
    assert policy.probs[0, 0] == 1.0
    assert values.v[0] == pytest.approx(1.0, abs=1e-6)


@settings(max_examples=10)
@given(seed=st.integers(0, 10_000))
def test_optimal_policy_matches_exhaustive_search(seed) -> None:
    mdp = random_dense_mdp(seed, 5, 2)
    policy, values = optimal_policy(mdp)

    best = max(
        deterministic_values(mdp, np.array(actions))[0]
        for actions in itertools.product(range(2), repeat=5)
    )
    assert performance(mdp, policy) == pytest.approx(best, abs=1e-6)
    np.testing.assert_array_equal(np.argmax(policy.probs, axis=1), greedy_actions(mdp, values.q, 1e-8))


def test_optimal_policy_beats_random_policies() -> None:
    mdp = random_dense_mdp(11, 6, 3)
    policy, _ = optimal_policy(mdp)
    optimum = performance(mdp, policy)
    rng = np.random.default_rng(0)
    for _ in range(100):
        candidate = TabularPolicy(probs=rng.dirichlet(np.ones(3), size=6))
        assert performance(mdp, candidate) <= optimum + 1e-6


def test_reach_avoid_prefers_the_looping_action(reach_mdp) -> None:
    # action b never enters the unsafe state, so it reaches the target almost surely
    table = exact_reach_avoid(reach_mdp)
    assert table.v[0] == pytest.approx(1.0, abs=1e-6)
    assert table.q[0, 0] == pytest.approx(0.7, abs=1e-9)
    assert table.v[1] == 1.0
    assert table.v[2] == 0.0


def test_reach_avoid_with_two_one_step_actions(risky_reach_mdp) -> None:
    table = exact_reach_avoid(risky_reach_mdp)
    assert table.v[0] == pytest.approx(0.7, abs=1e-12)
    assert table.q[0, 1] == pytest.approx(0.4, abs=1e-12)


def test_reach_avoid_boundary_at_initial_state() -> None:
    P = np.ones((1, 1, 1))
    target = dense_mdp(P, np.zeros((1, 1)), targets=[0])
    unsafe = dense_mdp(P, np.zeros((1, 1)), unsafe=[0])
    assert exact_reach_avoid(target).v[0] == 1.0
    assert exact_reach_avoid(unsafe).v[0] == 0.0


def test_states_that_cannot_reach_the_target_get_zero() -> None:
    P = np.zeros((2, 1, 2))
    P[0, 0, 0] = 1.0
    P[1, 0, 1] = 1.0
    table = exact_reach_avoid(dense_mdp(P, np.zeros((2, 1)), targets=[1]))
    assert table.v[0] == 0.0


@given(p=st.floats(0.05, 0.5), r=st.floats(0.05, 0.5), shift=st.floats(0.0, 1.0))
def test_reach_avoid_is_monotone_in_target_mass(p, r, shift) -> None:
    def chain(to_target, to_unsafe):
        P = np.zeros((3, 1, 3))
        P[0, 0] = [1.0 - to_target - to_unsafe, to_target, to_unsafe]
        P[1, 0, 1] = 1.0
        P[2, 0, 2] = 1.0
        return dense_mdp(P, np.zeros((3, 1)), targets=[1], unsafe=[2])

    low = exact_reach_avoid(chain(p, r)).v[0]
    high = exact_reach_avoid(chain(p + shift * r, (1.0 - shift) * r)).v[0]
    assert low == pytest.approx(p / (p + r), abs=1e-6)
    assert 0.0 <= low <= high + 1e-6 <= 1.0 + 1e-6


def test_deterministic_policy_places_all_mass_on_one_action(reach_mdp) -> None:
    policy = deterministic_policy(reach_mdp, np.array([1, 0, 0]))
    assert policy.support(0).tolist() == [1]
