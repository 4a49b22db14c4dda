import numpy as np
import pytest

from data_sources.estimators import map_model
from data_sources.file_formats import read_dataset, read_imdp, read_mdp, write_dataset, write_imdp, write_mdp, write_shield
from data_sources.trajectory_sampler import sample_trajectories
from imdp import build_imdp
from mdp_core import uniform_policy
from models import InvalidInputError, RobustReachAvoidTable, TransitionGraph
from shield import build_shield
from tests.helpers import exact_counts


def test_mdp_file_preserves_the_model(tmp_path, lake) -> None:
    path = tmp_path / "lake.mdp"
    write_mdp(lake.mdp, str(path))
    loaded = read_mdp(str(path))

    assert loaded.num_states == 16
    assert loaded.initial_state == 0
    assert loaded.target_states == lake.mdp.target_states
    assert loaded.unsafe_states == lake.mdp.unsafe_states
    np.testing.assert_array_equal(loaded.available, lake.mdp.available)
    np.testing.assert_array_equal(loaded.rewards, lake.mdp.rewards)
    assert abs(loaded.transitions - lake.mdp.transitions).max() == 0.0
    assert path.read_text().splitlines()[0] == "mdp 16 4 0.94999999999999996 0"


def test_dataset_file_keeps_trajectories_and_seed(tmp_path, lake) -> None:
    dataset = sample_trajectories(lake.mdp, uniform_policy(lake.mdp), 15, 20, seed=12)
    path = tmp_path / "data.txt"
    write_dataset(dataset, str(path))
    loaded = read_dataset(str(path))

    assert loaded.seed == 12
    assert loaded.total_transitions == dataset.total_transitions
    for a, b in zip(loaded.trajectories, dataset.trajectories):
        np.testing.assert_array_equal(a.states, b.states)
        np.testing.assert_array_equal(a.actions, b.actions)


def test_dataset_header_must_match_the_body(tmp_path) -> None:
    path = tmp_path / "broken.txt"
    path.write_text("# transitions=5 episodic=1 seed=0\n0 1 2\n")
    with pytest.raises(InvalidInputError):
        read_dataset(str(path))


def test_mdp_file_needs_a_header(tmp_path) -> None:
    path = tmp_path / "broken.mdp"
    path.write_text("t 0 0 0 1.0\n")
    with pytest.raises(InvalidInputError):
        read_mdp(str(path))


def test_imdp_file_keeps_bounds(tmp_path, risky_reach_mdp) -> None:
    graph = TransitionGraph.from_matrix(risky_reach_mdp.transitions)
    counts = exact_counts(risky_reach_mdp, 200)
    imdp = build_imdp(risky_reach_mdp, counts, map_model(counts, graph, 2.0), graph, 0.1, 1e-6)
    path = tmp_path / "model.imdp"
    write_imdp(imdp, str(path), discount=0.9)
    loaded = read_imdp(str(path))

    np.testing.assert_array_equal(loaded.lower, imdp.lower)
    np.testing.assert_array_equal(loaded.upper, imdp.upper)
    np.testing.assert_array_equal(loaded.graph.indices, graph.indices)
    assert loaded.delta_total == 0.1
    assert loaded.floor == 1e-6
    assert loaded.unsafe_states == frozenset([2])


def test_shield_dump_lists_allowed_actions(tmp_path, reach_mdp) -> None:
    scores = RobustReachAvoidTable(v=np.array([0.9, 1.0, 0.0]), q=np.array([[0.9, 0.5], [1.0, 0.0], [0.0, 0.0]]))
    shield = build_shield(scores, theta=0.2, kappa=0.0, mdp=reach_mdp)
    path = tmp_path / "shield.txt"
    write_shield(shield, str(path))

    lines = path.read_text().splitlines()
    assert lines[0] == "# theta=0.20000000000000001 kappa=0 relaxed=1"
    assert lines[1:] == ["0: 0", "1: 0", "2: 0"]

