import itertools

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from agents.spibb_agent import bootstrapped_set, spibb_policy_iteration
from mdp_core import optimal_policy, performance, uniform_policy
from models import BootstrappedSet, ConvergenceError, CountTable, InvalidInputError, Shield, TabularPolicy
from tests.helpers import random_dense_mdp, solve_values


def _counts(n_sa):
    n_sa = np.asarray(n_sa)
    S, A = n_sa.shape
    n_sas = sp.csr_matrix((n_sa.reshape(S * A, 1) * np.eye(1, S)).astype(np.int64))
    return CountTable(n_sa=n_sa, n_sas=n_sas)


def test_bootstrapped_pairs_are_the_rarely_seen_ones() -> None:
    counts = _counts([[5, 1], [0, 3], [9, 9]])
    bset = bootstrapped_set(counts, n_wedge=3)
    assert bset.membership.tolist() == [[False, True], [True, True], [False, False]]
    assert not bset.shield_applied


def test_shield_adds_disallowed_pairs_to_the_bootstrapped_set() -> None:
    counts = _counts([[5, 1], [0, 3], [9, 9]])
    allowed = np.array([[True, False], [True, True], [False, True]])
    shield = Shield(allowed=allowed, available=np.ones((3, 2), dtype=bool),
                    scores=np.zeros((3, 2)), theta=0.2, kappa=0.0)
    bset = bootstrapped_set(counts, n_wedge=3, shield=shield)
    assert bset.membership.tolist() == [[False, True], [True, True], [True, False]]
    assert bset.shield_applied


def test_negative_threshold_is_rejected() -> None:
    with pytest.raises(InvalidInputError):
        bootstrapped_set(_counts([[1]]), n_wedge=-1)


def test_everything_bootstrapped_returns_the_baseline() -> None:
    mdp = random_dense_mdp(1, 5, 3)
    baseline = uniform_policy(mdp)
    bset = BootstrappedSet(membership=np.ones((5, 3), dtype=bool), n_wedge=10)
    policy = spibb_policy_iteration(mdp, baseline, bset)
    np.testing.assert_array_equal(policy.probs, baseline.probs)


def test_empty_bootstrapped_set_recovers_the_optimal_policy() -> None:
    mdp = random_dense_mdp(2, 6, 3)
    bset = BootstrappedSet(membership=np.zeros((6, 3), dtype=bool), n_wedge=0)
    policy = spibb_policy_iteration(mdp, uniform_policy(mdp), bset)
    best, _ = optimal_policy(mdp)
    assert performance(mdp, policy) == pytest.approx(performance(mdp, best), abs=1e-6)
    assert np.all(policy.probs.max(axis=1) == 1.0)


@settings(max_examples=20)
@given(seed=st.integers(0, 10_000), share=st.floats(0.0, 1.0))
def test_spibb_copies_the_baseline_and_never_does_worse(seed, share) -> None:
    mdp = random_dense_mdp(seed, 5, 3)
    rng = np.random.default_rng(seed)
    baseline_probs = rng.dirichlet(np.ones(3), size=5)
    baseline = TabularPolicy(probs=baseline_probs)
    membership = rng.random((5, 3)) < share
    bset = BootstrappedSet(membership=membership, n_wedge=0)

    policy = spibb_policy_iteration(mdp, baseline, bset)

    np.testing.assert_allclose(policy.probs[membership], baseline_probs[membership])
    np.testing.assert_allclose(policy.probs.sum(axis=1), 1.0)
    assert performance(mdp, policy) >= performance(mdp, baseline) - 1e-6


def test_round_cap_raises() -> None:
    mdp = random_dense_mdp(3, 4, 2)
    bset = BootstrappedSet(membership=np.zeros((4, 2), dtype=bool), n_wedge=0)
    with pytest.raises(ConvergenceError):
        spibb_policy_iteration(mdp, uniform_policy(mdp), bset, max_rounds=1)


def test_mismatched_bootstrapped_set_is_rejected() -> None:
    mdp = random_dense_mdp(3, 4, 2)
    bset = BootstrappedSet(membership=np.zeros((3, 2), dtype=bool), n_wedge=0)
    with pytest.raises(InvalidInputError):
        spibb_policy_iteration(mdp, uniform_policy(mdp), bset)


def _constrained_vertices(baseline_probs, free):
    """Every policy that copies the baseline on bootstrapped pairs and puts the free mass on one free action."""
    choices = [np.flatnonzero(row) if row.any() else [None] for row in free]
    fixed = np.where(free, 0.0, baseline_probs)
    free_mass = np.where(free, baseline_probs, 0.0).sum(axis=1)
    for picks in itertools.product(*choices):
        probs = fixed.copy()
        for s, a in enumerate(picks):
            if a is not None:
                probs[s, a] += free_mass[s]
        yield TabularPolicy(probs=probs)


@pytest.mark.parametrize("seed", range(5))
def test_spibb_is_optimal_among_policies_that_respect_the_bootstrapped_set(seed) -> None:
    mdp = random_dense_mdp(seed, 4, 3)
    rng = np.random.default_rng(100 + seed)
    baseline_probs = rng.dirichlet(np.ones(3), size=4)
    membership = rng.random((4, 3)) < 0.4
    free = ~membership

    bset = BootstrappedSet(membership=membership, n_wedge=0)
    policy = spibb_policy_iteration(mdp, TabularPolicy(probs=baseline_probs), bset)

    # bootstrapped pairs keep their baseline mass; the free mass is only moved between free actions
    np.testing.assert_allclose(policy.probs[membership], baseline_probs[membership])
    np.testing.assert_allclose(
        np.where(free, policy.probs, 0.0).sum(axis=1),
        np.where(free, baseline_probs, 0.0).sum(axis=1),
    )
    best = max(solve_values(mdp, candidate)[mdp.initial_state]
               for candidate in _constrained_vertices(baseline_probs, free))
    assert solve_values(mdp, policy)[mdp.initial_state] == pytest.approx(best, abs=1e-6)


def test_each_round_never_lowers_the_values(monkeypatch) -> None:
    import agents.spibb_agent as spibb_agent

    evaluated = []
    original = spibb_agent.policy_evaluation

    def recording(*args, **kwargs):
        values = original(*args, **kwargs)
        evaluated.append(values.v)
        return values

    monkeypatch.setattr(spibb_agent, "policy_evaluation", recording)
    mdp = random_dense_mdp(7, 8, 3)
    rng = np.random.default_rng(7)
    baseline = TabularPolicy(probs=rng.dirichlet(np.ones(3), size=8))
    bset = BootstrappedSet(membership=rng.random((8, 3)) < 0.3, n_wedge=0)

    spibb_policy_iteration(mdp, baseline, bset)

    assert len(evaluated) >= 2
    for before, after in zip(evaluated, evaluated[1:]):
        assert np.all(after >= before - 1e-6)
