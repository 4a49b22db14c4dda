import numpy as np
import pytest
import scipy.sparse as sp
from pydantic import ValidationError

from models import (
    CountTable,
    Dataset,
    ExperimentConfig,
    InfeasibleIntervalError,
    IntervalMdp,
    InvalidInputError,
    Method,
    Shield,
    TabularPolicy,
    Trajectory,
    TransitionGraph,
)
from tests.helpers import dense_mdp


def test_non_stochastic_row_is_rejected() -> None:
    P = np.zeros((1, 1, 2))
    P[0, 0] = [0.5, 0.4]
    with pytest.raises(InvalidInputError):
        dense_mdp(P, np.zeros((1, 1)), available=np.ones((1, 1), dtype=bool))


def test_overlapping_labels_are_rejected() -> None:
    with pytest.raises(InvalidInputError):
        dense_mdp(np.ones((1, 1, 1)), np.zeros((1, 1)), targets=[0], unsafe=[0])


def test_state_without_actions_is_rejected() -> None:
    P = np.zeros((2, 1, 2))
    P[0, 0, 0] = 1.0
    with pytest.raises(InvalidInputError):
        dense_mdp(P, np.zeros((2, 1)))


def test_mdp_arrays_are_read_only(reach_mdp) -> None:
    with pytest.raises(ValueError):
        reach_mdp.rewards[0, 0] = 1.0
    assert reach_mdp.actions(1).tolist() == [0]
    assert reach_mdp.successors(0, 0) == pytest.approx({1: 0.7, 2: 0.3})


def test_replace_revalidates(reach_mdp) -> None:
    changed = reach_mdp.replace(discount=0.5)
    assert changed.discount == 0.5
    assert reach_mdp.discount == 0.9
    with pytest.raises(InvalidInputError):
        reach_mdp.replace(unsafe_states=frozenset([1]))


def test_policy_rows_must_sum_to_one() -> None:
    with pytest.raises(InvalidInputError):
        TabularPolicy(probs=[[0.5, 0.4]])
    with pytest.raises(InvalidInputError):
        TabularPolicy(probs=[[1.5, -0.5]])


def test_trajectory_needs_one_more_state_than_actions() -> None:
    with pytest.raises(InvalidInputError):
        Trajectory(states=[0, 1], actions=[0, 0])
    assert len(Trajectory(states=[0, 1, 1], actions=[0, 1])) == 2


def test_dataset_check_catches_unavailable_actions(reach_mdp) -> None:
    good = Dataset(trajectories=[Trajectory(states=[0, 1], actions=[0])])
    good.check(reach_mdp)
    bad = Dataset(trajectories=[Trajectory(states=[0, 1, 1], actions=[0, 1])])
    with pytest.raises(InvalidInputError):
        bad.check(reach_mdp)
    late_start = Dataset(trajectories=[Trajectory(states=[1, 1], actions=[0])])
    with pytest.raises(InvalidInputError):
        late_start.check(reach_mdp)


def test_dataset_concat_keeps_order() -> None:
    first = Dataset(trajectories=[Trajectory(states=[0], actions=[])], seed=4)
    second = Dataset(trajectories=[Trajectory(states=[0, 1], actions=[0])])
    merged = first.concat(second)
    assert merged.total_transitions == 1
    assert merged.seed == 4
    assert [len(t) for t in merged.trajectories] == [0, 1]


def test_count_table_marginals_must_agree() -> None:
    n_sas = sp.csr_matrix(np.array([[1, 1], [0, 0]]))
    CountTable(n_sa=[[2], [0]], n_sas=n_sas)
    with pytest.raises(InvalidInputError):
        CountTable(n_sa=[[3], [0]], n_sas=n_sas)


def test_transition_graph_from_matrix(reach_mdp) -> None:
    graph = TransitionGraph.from_matrix(reach_mdp.transitions)
    assert graph.num_transitions == 6
    assert graph.support(0, 0).tolist() == [1, 2]
    assert graph.support(1, 1).tolist() == []
    assert graph.row_ids.tolist() == [0, 0, 1, 1, 2, 4]
    assert graph.support_sizes().tolist() == [[2, 2], [1, 0], [1, 0]]
    np.testing.assert_allclose(graph.gather(reach_mdp.transitions), [0.7, 0.3, 0.6, 0.4, 1.0, 1.0])


def test_interval_polytope_must_be_nonempty(reach_mdp) -> None:
    graph = TransitionGraph.from_matrix(reach_mdp.transitions)
    common = dict(
        num_states=3, num_actions=2, initial_state=0, available=reach_mdp.available,
        graph=graph, point=graph.gather(reach_mdp.transitions),
        delta_total=0.1, delta_per_transition=0.1 / 6, floor=1e-8,
    )
    lower = np.array([0.6, 0.2, 0.5, 0.3, 1.0, 1.0])
    IntervalMdp(lower=lower, upper=np.minimum(lower + 0.2, 1.0), **common)
    crowded = lower.copy()
    crowded[:2] += 0.2
    with pytest.raises(InfeasibleIntervalError):
        IntervalMdp(lower=crowded, upper=np.minimum(crowded + 0.1, 1.0), **common)
    imdp = IntervalMdp(lower=lower, upper=np.minimum(lower + 0.2, 1.0), **common)
    assert imdp.interval(0, 0, 2) == pytest.approx((0.2, 0.4))
    assert imdp.interval(0, 0, 0) == (0.0, 0.0)


def test_shield_must_allow_an_action_everywhere() -> None:
    available = np.ones((2, 2), dtype=bool)
    with pytest.raises(InvalidInputError):
        Shield(allowed=[[True, False], [False, False]], available=available,
               scores=np.zeros((2, 2)), theta=0.1, kappa=0.0)
    shield = Shield(allowed=[[True, False], [False, True]], available=available,
                    scores=np.zeros((2, 2)), theta=0.1, kappa=0.0)
    assert shield.unsafe_actions(0).tolist() == [1]


def test_experiment_config_validates_domains() -> None:
    with pytest.raises(ValidationError):
        ExperimentConfig(env="random", dataset_sizes=[10], runs=0)
    with pytest.raises(ValidationError):
        ExperimentConfig(env="random", dataset_sizes=[])
    with pytest.raises(ValidationError):
        ExperimentConfig(env="random", dataset_sizes=[10], delta=1.5)
    config = ExperimentConfig(env="random", dataset_sizes=[10], methods=["spibb", "spibb", "duipi"])
    assert config.methods == [Method.SPIBB, Method.DUIPI]


def test_shielded_methods() -> None:
    assert {m for m in Method if m.shielded} == {
        Method.SPIBB_SHIELD, Method.DUIPI_SHIELD, Method.BASELINE_SHIELD,
    }
