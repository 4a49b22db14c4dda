"""Plain-text formats for MDPs, interval MDPs, datasets and shields."""

import logging
from typing import Dict, List, TextIO, Tuple

import numpy as np
import scipy.sparse as sp

from models import (
    Dataset,
    IntervalMdp,
    InvalidInputError,
    Mdp,
    Shield,
    TransitionGraph,
    Trajectory,
)

logger = logging.getLogger(__name__)


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _write_labels(handle: TextIO, target_states, unsafe_states) -> None:
    for state in sorted(target_states):
        handle.write(f"label target {state}\n")
    for state in sorted(unsafe_states):
        handle.write(f"label unsafe {state}\n")


def _write_rewards(handle: TextIO, rewards: np.ndarray, available: np.ndarray) -> None:
    for s, a in zip(*np.nonzero(available & (rewards != 0.0))):
        handle.write(f"r {s} {a} {_fmt(rewards[s, a])}\n")


def write_mdp(mdp: Mdp, path: str) -> None:
    """Write ``mdp`` line by line; unavailable pairs are omitted."""
    A = mdp.num_actions
    transitions = mdp.transitions.tocoo()
    with open(path, "w") as handle:
        handle.write(f"mdp {mdp.num_states} {A} {_fmt(mdp.discount)} {mdp.initial_state}\n")
        _write_labels(handle, mdp.target_states, mdp.unsafe_states)
        for row, successor, prob in zip(transitions.row, transitions.col, transitions.data):
            s, a = divmod(int(row), A)
            if mdp.available[s, a] and prob > 0.0:
                handle.write(f"t {s} {a} {successor} {_fmt(prob)}\n")
        _write_rewards(handle, mdp.rewards, mdp.available)
    logger.info(f"Wrote MDP with {mdp.num_states} states to {path}")


def _parse(path: str) -> Tuple[Dict[str, str], List[List[str]]]:
    """Header comment fields and tokenised body lines."""
    meta: Dict[str, str] = {}
    lines: List[List[str]] = []
    with open(path, "r") as handle:
        for raw in handle:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for field in line[1:].split():
                    if "=" in field:
                        key, value = field.split("=", 1)
                        meta[key] = value
                continue
            lines.append(line.split())
    return meta, lines


def _read_structure(lines: List[List[str]], path: str):
    if not lines or lines[0][0] != "mdp" or len(lines[0]) != 5:
        raise InvalidInputError(f"{path}: missing 'mdp <S> <A> <gamma> <initial>' header")
    _, S, A, gamma, initial = lines[0]
    S, A = int(S), int(A)
    rewards = np.zeros((S, A))
    targets, unsafe = set(), set()
    for tokens in lines[1:]:
        if tokens[0] == "r":
            rewards[int(tokens[1]), int(tokens[2])] = float(tokens[3])
        elif tokens[0] == "label":
            (targets if tokens[1] == "target" else unsafe).add(int(tokens[2]))
    return S, A, float(gamma), int(initial), rewards, frozenset(targets), frozenset(unsafe)


def read_mdp(path: str) -> Mdp:
    """Read an MDP written by ``write_mdp``; available actions are the pairs with transitions."""
    _, lines = _parse(path)
    S, A, gamma, initial, rewards, targets, unsafe = _read_structure(lines, path)
    rows, cols, data = [], [], []
    for tokens in lines[1:]:
        if tokens[0] == "t":
            s, a, successor = int(tokens[1]), int(tokens[2]), int(tokens[3])
            rows.append(s * A + a)
            cols.append(successor)
            data.append(float(tokens[4]))
    transitions = sp.csr_matrix((data, (rows, cols)), shape=(S * A, S))
    available = (np.diff(transitions.indptr) > 0).reshape(S, A)
    return Mdp(
        num_states=S,
        num_actions=A,
        initial_state=initial,
        available=available,
        transitions=transitions,
        rewards=rewards,
        discount=gamma,
        target_states=targets,
        unsafe_states=unsafe,
    )


def write_imdp(imdp: IntervalMdp, path: str, discount: float = 0.0, rewards=None) -> None:
    """Write interval bounds as ``ti`` lines under an ``mdp`` header."""
    graph = imdp.graph
    A = imdp.num_actions
    with open(path, "w") as handle:
        handle.write(f"# delta_I={_fmt(imdp.delta_total)} xi={_fmt(imdp.floor)}\n")
        handle.write(f"mdp {imdp.num_states} {A} {_fmt(discount)} {imdp.initial_state}\n")
        _write_labels(handle, imdp.target_states, imdp.unsafe_states)
        for row, successor, lo, hi in zip(graph.row_ids, graph.indices, imdp.lower, imdp.upper):
            s, a = divmod(int(row), A)
            handle.write(f"ti {s} {a} {successor} {_fmt(lo)} {_fmt(hi)}\n")
        if rewards is not None:
            _write_rewards(handle, np.asarray(rewards), imdp.available)
    logger.info(f"Wrote IMDP with {graph.num_transitions} intervals to {path}")


def read_imdp(path: str) -> IntervalMdp:
    """Read an IMDP written by ``write_imdp``.

    The point estimate is not stored; the interval midpoints stand in for it.
    """
    meta, lines = _parse(path)
    if "delta_I" not in meta or "xi" not in meta:
        raise InvalidInputError(f"{path}: missing '# delta_I=.. xi=..' header")
    S, A, _, initial, _, targets, unsafe = _read_structure(lines, path)
    entries = sorted(
        (int(t[1]) * A + int(t[2]), int(t[3]), float(t[4]), float(t[5])) for t in lines[1:] if t[0] == "ti"
    )
    rows = np.array([e[0] for e in entries], dtype=np.int64)
    indices = np.array([e[1] for e in entries], dtype=np.int64)
    lower = np.array([e[2] for e in entries])
    upper = np.array([e[3] for e in entries])
    indptr = np.searchsorted(rows, np.arange(S * A + 1), side="left")
    graph = TransitionGraph(num_states=S, num_actions=A, indptr=indptr, indices=indices)
    delta_total = float(meta["delta_I"])
    return IntervalMdp(
        num_states=S,
        num_actions=A,
        initial_state=initial,
        available=graph.support_sizes() > 0,
        target_states=targets,
        unsafe_states=unsafe,
        graph=graph,
        lower=lower,
        upper=upper,
        point=(lower + upper) / 2.0,
        delta_total=delta_total,
        delta_per_transition=delta_total / max(graph.num_transitions, 1),
        floor=float(meta["xi"]),
    )


def write_dataset(dataset: Dataset, path: str) -> None:
    """One trajectory per line as ``s a s a ... s``."""
    seed = dataset.seed if dataset.seed is not None else 0
    with open(path, "w") as handle:
        handle.write(
            f"# transitions={dataset.total_transitions} episodic={int(dataset.episodic)} seed={seed}\n"
        )
        for trajectory in dataset.trajectories:
            tokens = []
            for state, action in zip(trajectory.states[:-1], trajectory.actions):
                tokens.extend((str(state), str(action)))
            tokens.append(str(trajectory.states[-1]))
            handle.write(" ".join(tokens) + "\n")
    logger.info(f"Wrote dataset of {len(dataset.trajectories)} trajectories to {path}")


def read_dataset(path: str) -> Dataset:
    meta, lines = _parse(path)
    trajectories = []
    for tokens in lines:
        if len(tokens) % 2 != 1:
            raise InvalidInputError(f"{path}: trajectory lines must alternate states and actions")
        values = [int(token) for token in tokens]
        trajectories.append(Trajectory(states=values[0::2], actions=values[1::2]))
    dataset = Dataset(
        trajectories=trajectories,
        episodic=meta.get("episodic", "1") != "0",
        seed=int(meta["seed"]) if "seed" in meta else None,
    )
    if "transitions" in meta and int(meta["transitions"]) != dataset.total_transitions:
        raise InvalidInputError(f"{path}: header transition count does not match the body")
    return dataset


def write_shield(shield: Shield, path: str) -> None:
    """Allowed actions per state, one ``s: a1 a2 ...`` line each."""
    with open(path, "w") as handle:
        handle.write(
            f"# theta={_fmt(shield.theta)} kappa={_fmt(shield.kappa)} relaxed={len(shield.relaxed_states)}\n"
        )
        for state in range(shield.allowed.shape[0]):
            actions = " ".join(str(a) for a in shield.allowed_actions(state))
            handle.write(f"{state}: {actions}\n")
    logger.info(f"Wrote shield over {shield.allowed.shape[0]} states to {path}")
