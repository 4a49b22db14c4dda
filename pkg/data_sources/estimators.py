"""Count tables and point estimates of the transition model and baseline policy."""

import logging
from typing import Optional

import numpy as np
import scipy.sparse as sp

from models import (
    CountTable,
    Dataset,
    EstimatedModel,
    EstimatorKind,
    InvalidInputError,
    Mdp,
    TabularPolicy,
    TransitionGraph,
)

logger = logging.getLogger(__name__)


def count(dataset: Dataset, num_states: int, num_actions: int) -> CountTable:
    """Visit counts n(s, a) and n(s, a, s') over every transition in the dataset."""
    trajectories = [t for t in dataset.trajectories if len(t.actions)]
    if trajectories:
        states = np.concatenate([t.states[:-1] for t in trajectories])
        actions = np.concatenate([t.actions for t in trajectories])
        successors = np.concatenate([t.states[1:] for t in trajectories])
    else:
        states = actions = successors = np.zeros(0, dtype=np.int64)

    if states.size and (
        states.max() >= num_states or successors.max() >= num_states or actions.max() >= num_actions
    ):
        raise InvalidInputError("dataset indices exceed the MDP dimensions")

    rows = states * num_actions + actions
    n_sas = sp.coo_matrix(
        (np.ones(rows.size, dtype=np.int64), (rows, successors)),
        shape=(num_states * num_actions, num_states),
    ).tocsr()
    n_sa = np.bincount(rows, minlength=num_states * num_actions).reshape(num_states, num_actions)
    return CountTable(n_sa=n_sa.astype(np.int64), n_sas=n_sas)


def merge_counts(first: CountTable, second: CountTable) -> CountTable:
    """Counts of the union of two datasets."""
    if first.n_sa.shape != second.n_sa.shape:
        raise InvalidInputError("count tables have different shapes")
    return CountTable(n_sa=first.n_sa + second.n_sa, n_sas=first.n_sas + second.n_sas)


def mle_model(counts: CountTable) -> EstimatedModel:
    """Empirical frequencies; pairs never tried keep an all-zero row."""
    n_sa = counts.n_sa.ravel().astype(float)
    inv = np.divide(1.0, n_sa, out=np.zeros_like(n_sa), where=n_sa > 0)
    transitions = sp.diags(inv) @ counts.n_sas.astype(float)
    return EstimatedModel(point_transitions=sp.csr_matrix(transitions), estimator_kind=EstimatorKind.MLE)


def _graph_counts(counts: CountTable, graph: TransitionGraph) -> np.ndarray:
    if counts.n_sa.shape != (graph.num_states, graph.num_actions):
        raise InvalidInputError("count table does not match the transition graph")
    return graph.gather(counts.n_sas).astype(float)


def map_model(counts: CountTable, graph: TransitionGraph, alpha: float) -> EstimatedModel:
    """Mode of the Dirichlet(alpha) posterior restricted to the graph support.

    T(s'|s,a) = (alpha + n(s,a,s') - 1) / (m (alpha - 1) + n(s,a)), with m = |supp(s,a)|.
    """
    if alpha <= 1.0:
        raise InvalidInputError(f"MAP estimation needs alpha > 1, got {alpha}")
    k = _graph_counts(counts, graph)
    m = np.diff(graph.indptr)
    denom = m * (alpha - 1.0) + counts.n_sa.ravel()
    row_ids = graph.row_ids
    values = (alpha + k - 1.0) / denom[row_ids]
    return EstimatedModel(
        point_transitions=graph.matrix(values),
        estimator_kind=EstimatorKind.MAP,
        alpha=alpha,
    )


def dirichlet_mean_model(counts: CountTable, graph: TransitionGraph, alpha: float) -> EstimatedModel:
    """Posterior mean (alpha + n(s,a,s')) / (m alpha + n(s,a)) on the graph support."""
    if alpha <= 0.0:
        raise InvalidInputError(f"Dirichlet prior needs alpha > 0, got {alpha}")
    k = _graph_counts(counts, graph)
    m = np.diff(graph.indptr)
    denom = m * alpha + counts.n_sa.ravel()
    values = (alpha + k) / denom[graph.row_ids]
    return EstimatedModel(
        point_transitions=graph.matrix(values),
        estimator_kind=EstimatorKind.DIRICHLET_MEAN,
        alpha=alpha,
    )


def estimate_baseline(
    counts: CountTable,
    num_actions: int,
    available: Optional[np.ndarray] = None,
) -> TabularPolicy:
    """Empirical behaviour policy n(s,a)/n(s); unvisited states act uniformly.

    With an availability mask the uniform fallback covers A(s) only.
    """
    if counts.n_sa.shape[1] != num_actions:
        raise InvalidInputError("count table does not match num_actions")
    n_sa = counts.n_sa.astype(float)
    n_s = n_sa.sum(axis=1, keepdims=True)
    if available is None:
        fallback = np.full_like(n_sa, 1.0 / num_actions)
    else:
        mask = available.astype(float)
        fallback = mask / mask.sum(axis=1, keepdims=True)
    probs = np.where(n_s > 0, n_sa / np.maximum(n_s, 1.0), fallback)
    return TabularPolicy(probs=probs)


def mixture_baseline(heuristic: TabularPolicy, epsilon: float, available: np.ndarray) -> TabularPolicy:
    """epsilon * heuristic + (1 - epsilon) * uniform over A(s), renormalised on A(s)."""
    if not 0.0 <= epsilon <= 1.0:
        raise InvalidInputError(f"epsilon must lie in [0, 1], got {epsilon}")
    mask = available.astype(float)
    uniform = mask / mask.sum(axis=1, keepdims=True)
    probs = (epsilon * heuristic.probs + (1.0 - epsilon) * uniform) * mask
    return TabularPolicy(probs=probs / probs.sum(axis=1, keepdims=True))


def as_mdp(shape: Mdp, model: EstimatedModel) -> Mdp:
    """Plug an estimated model into the structure of ``shape``.

    Available pairs with an empty row become self-loops so the result is a
    valid MDP; rows of unavailable pairs are dropped.
    """
    S, A = shape.num_states, shape.num_actions
    transitions = sp.csr_matrix(model.point_transitions, dtype=float)
    if transitions.shape != (S * A, S):
        raise InvalidInputError("estimated model does not match the MDP shape")
    available = shape.available.ravel()
    transitions = sp.diags(available.astype(float)) @ transitions
    sums = np.asarray(transitions.sum(axis=1)).ravel()
    empty = np.flatnonzero(available & (sums == 0.0))
    if empty.size:
        loops = sp.csr_matrix((np.ones(empty.size), (empty, empty // A)), shape=(S * A, S))
        transitions = transitions + loops
        logger.debug(f"Repaired {empty.size} unvisited state-action rows with self-loops")
    return shape.replace(transitions=sp.csr_matrix(transitions))
