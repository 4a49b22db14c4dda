"""Interval MDPs learned from data and their robust reach-avoid probabilities."""

import logging
from typing import Optional

import numpy as np

from config import MAX_VALUE_ITERATIONS, VALUE_TOL
from models import (
    PROB_TOL,
    ConvergenceError,
    CountTable,
    EstimatedModel,
    InfeasibleFloorError,
    InfeasibleIntervalError,
    IntervalMdp,
    InvalidInputError,
    Mdp,
    RobustReachAvoidTable,
    TransitionGraph,
)

logger = logging.getLogger(__name__)


def hoeffding_width(n: int, delta_t: float) -> float:
    """Half-width sqrt(log(2/delta_t) / (2n)) of a Hoeffding interval."""
    if n < 1:
        raise InvalidInputError("Hoeffding width needs at least one sample")
    if not 0.0 < delta_t < 1.0:
        raise InvalidInputError(f"delta_t must lie in (0, 1), got {delta_t}")
    return float(np.sqrt(np.log(2.0 / delta_t) / (2.0 * n)))


def split_confidence(delta_total: float, graph: TransitionGraph) -> float:
    """Union-bound budget per graph transition."""
    if graph.num_transitions == 0:
        raise InvalidInputError("cannot split confidence over an empty graph")
    return delta_total / graph.num_transitions


def _segment_starts(row_ids: np.ndarray) -> np.ndarray:
    starts = np.ones(row_ids.size, dtype=bool)
    starts[1:] = row_ids[1:] != row_ids[:-1]
    return starts


def _exclusive_segment_cumsum(x: np.ndarray, row_ids: np.ndarray) -> np.ndarray:
    """Sum of the earlier entries of the same row, for row-grouped x."""
    total = np.cumsum(x)
    before = total - x
    starts = _segment_starts(row_ids)
    segment = np.cumsum(starts) - 1
    return before - before[np.flatnonzero(starts)][segment]


def _order_fill(
    row_ids: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    values: np.ndarray,
    num_rows: int,
    order: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Minimising distribution of every row of an interval polytope.

    Each entry starts at its lower bound; the remaining mass goes to the
    cheapest successors first, equal values in index order.
    """
    if order is None:
        order = np.lexsort((values, row_ids))
    rows = row_ids[order]
    capacity = (upper - lower)[order]
    remaining = 1.0 - np.bincount(row_ids, weights=lower, minlength=num_rows)
    used = _exclusive_segment_cumsum(capacity, rows)
    extra = np.clip(remaining[rows] - used, 0.0, capacity)
    p = lower.copy()
    p[order] += extra
    return p


def worst_case_distribution(lowers, uppers, successor_values) -> np.ndarray:
    """Distribution in the box [lowers, uppers] on the simplex minimising its value."""
    lowers = np.asarray(lowers, dtype=float)
    uppers = np.asarray(uppers, dtype=float)
    values = np.asarray(successor_values, dtype=float)
    if not (lowers.shape == uppers.shape == values.shape) or lowers.ndim != 1 or not lowers.size:
        raise InvalidInputError("bounds and values must be aligned nonempty vectors")
    if np.any(lowers > uppers) or lowers.sum() > 1.0 + PROB_TOL or uppers.sum() < 1.0 - PROB_TOL:
        raise InfeasibleIntervalError("interval polytope is empty")
    return _order_fill(np.zeros(lowers.size, dtype=np.int64), lowers, uppers, values, 1)


def build_imdp(
    mdp: Mdp,
    counts: CountTable,
    point: EstimatedModel,
    graph: TransitionGraph,
    delta_total: float,
    xi: float,
) -> IntervalMdp:
    """Hoeffding intervals around ``point`` on the support of ``graph``.

    Pairs never tried get [xi, 1] on every successor. Rows whose upper
    bounds fall short of one after clipping are scaled up proportionally.
    ``mdp`` supplies the initial state, availability and labels.
    """
    if not 0.0 < xi < 1.0:
        raise InvalidInputError(f"xi must lie in (0, 1), got {xi}")
    if not 0.0 < delta_total < 1.0:
        raise InvalidInputError(f"delta must lie in (0, 1), got {delta_total}")
    sizes = np.diff(graph.indptr)
    if np.any(xi * sizes > 1.0):
        rows = np.flatnonzero(xi * sizes > 1.0)
        raise InfeasibleFloorError(
            f"floor {xi} cannot fit under the support of pairs {[divmod(int(r), graph.num_actions) for r in rows[:5]]}"
        )

    delta_t = split_confidence(delta_total, graph)
    row_ids = graph.row_ids
    estimate = graph.gather(point.point_transitions)
    n = counts.n_sa.ravel()[row_ids].astype(float)
    eta = np.where(n > 0, np.sqrt(np.log(2.0 / delta_t) / (2.0 * np.maximum(n, 1.0))), np.inf)

    lower = np.where(n > 0, np.maximum(xi, estimate - eta), xi)
    upper = np.where(n > 0, np.minimum(estimate + eta, 1.0), 1.0)
    upper = np.maximum(upper, lower)

    num_rows = graph.num_states * graph.num_actions
    up_sums = np.bincount(row_ids, weights=upper, minlength=num_rows)
    short = (up_sums < 1.0) & (sizes > 0)
    if short.any():
        scale = np.ones(num_rows)
        scale[short] = 1.0 / up_sums[short]
        upper = np.minimum(upper * scale[row_ids], 1.0)
        logger.warning(f"Scaled up upper bounds of {int(short.sum())} pairs to keep their polytopes nonempty")

    logger.debug(f"Built IMDP over {graph.num_transitions} transitions with delta_T={delta_t:.3e}")
    return IntervalMdp(
        num_states=mdp.num_states,
        num_actions=mdp.num_actions,
        initial_state=mdp.initial_state,
        available=mdp.available,
        target_states=mdp.target_states,
        unsafe_states=mdp.unsafe_states,
        graph=graph,
        lower=lower,
        upper=upper,
        point=estimate,
        delta_total=delta_total,
        delta_per_transition=delta_t,
        floor=xi,
    )


def _sorted_within_rows(values: np.ndarray, rows: np.ndarray) -> bool:
    if values.size < 2:
        return True
    return bool(np.all((np.diff(values) >= 0.0) | (np.diff(rows) != 0)))


def robust_reach_avoid(
    imdp: IntervalMdp,
    tol: float = VALUE_TOL,
    max_iter: int = MAX_VALUE_ITERATIONS,
    keep_witness: bool = False,
) -> RobustReachAvoidTable:
    """Maximal worst-case probability of reaching S_T while avoiding S_U.

    Interval value iteration from the zero vector; every sweep resolves the
    inner minimisation exactly by ordering successors by value.
    """
    S, A = imdp.num_states, imdp.num_actions
    graph = imdp.graph
    row_ids = graph.row_ids
    successors = graph.indices
    target, unsafe = imdp.target_mask, imdp.unsafe_mask
    available = imdp.available

    def sweep(v: np.ndarray, order: np.ndarray):
        values = v[successors]
        if not _sorted_within_rows(values[order], row_ids[order]):
            order = np.lexsort((values, row_ids))
        p = _order_fill(row_ids, imdp.lower, imdp.upper, values, S * A, order)
        q = np.bincount(row_ids, weights=p * values, minlength=S * A).reshape(S, A)
        return p, q, order

    v = target.astype(float)
    order = np.lexsort((v[successors], row_ids))
    delta = np.inf
    for iteration in range(1, max_iter + 1):
        _, q, order = sweep(v, order)
        v_new = np.where(available, q, -np.inf).max(axis=1)
        v_new[target] = 1.0
        v_new[unsafe] = 0.0
        delta = float(np.max(np.abs(v_new - v)))
        v = v_new
        if delta <= tol:
            break
    else:
        raise ConvergenceError("interval value iteration did not converge", delta, max_iter)

    logger.debug(f"Robust reach-avoid converged after {iteration} sweeps")
    p, q, _ = sweep(v, order)
    q[target] = 1.0
    q[unsafe] = 0.0
    q[~available] = 0.0
    witness = graph.matrix(p) if keep_witness else None
    return RobustReachAvoidTable(
        v=np.clip(v, 0.0, 1.0),
        q=np.clip(q, 0.0, 1.0),
        worst_case_witness=witness,
    )


def contains_mdp(imdp: IntervalMdp, mdp: Mdp, tol: float = PROB_TOL) -> bool:
    """Whether every available transition of ``mdp`` lies inside its interval."""
    if (mdp.num_states, mdp.num_actions) != (imdp.num_states, imdp.num_actions):
        raise InvalidInputError("MDP and IMDP dimensions differ")
    graph = imdp.graph
    values = graph.gather(mdp.transitions)
    rows = graph.row_ids
    available_entries = mdp.available.ravel()[rows]
    inside = (values >= imdp.lower - tol) & (values <= imdp.upper + tol)
    if not np.all(inside | ~available_entries):
        return False
    # true mass outside the graph support is never covered
    covered = np.bincount(rows, weights=values, minlength=mdp.num_states * mdp.num_actions)
    return bool(np.all(np.abs(covered[mdp.available.ravel()] - 1.0) <= tol))


def scale_intervals(imdp: IntervalMdp, factor: float) -> IntervalMdp:
    """Shrink every interval toward its point estimate by ``factor`` in [0, 1]."""
    if not 0.0 <= factor <= 1.0:
        raise InvalidInputError(f"factor must lie in [0, 1], got {factor}")
    point = imdp.point
    lower = np.maximum(point + factor * (imdp.lower - point), imdp.floor)
    upper = np.maximum(point + factor * (imdp.upper - point), lower)
    return IntervalMdp(**{**dict(imdp), "lower": lower, "upper": upper})
