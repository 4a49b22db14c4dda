"""Data models for the safe policy improvement toolkit."""

from enum import Enum
from typing import Any, Dict, FrozenSet, List, Optional

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Tolerance for "sums to one" checks on probability rows.
PROB_TOL = 1e-9


class SafeSpiError(Exception):
    """Base class for toolkit errors."""


class InvalidInputError(SafeSpiError):
    """Raised when an argument violates an operation's precondition."""


class ConvergenceError(SafeSpiError, RuntimeError):
    """Raised when an iterative solver exhausts its iteration budget."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (residual={residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


class InfeasibleIntervalError(SafeSpiError):
    """Raised when an interval polytope contains no distribution."""


class InfeasibleFloorError(InfeasibleIntervalError):
    """Raised when the interval floor cannot fit under a support set."""


class GenerationError(SafeSpiError, RuntimeError):
    """Raised when a random benchmark cannot be generated."""


def _frozen_array(value: Any, dtype) -> np.ndarray:
    array = np.array(value, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def _csr(value: Any) -> sp.csr_matrix:
    matrix = sp.csr_matrix(value, copy=True)
    matrix.sort_indices()
    return matrix


class Method(str, Enum):
    """Policy construction methods and reference lines."""
    BASELINE = "baseline"
    BASIC = "basic"
    SPIBB = "spibb"
    SPIBB_SHIELD = "spibb_shield"
    DUIPI = "duipi"
    DUIPI_SHIELD = "duipi_shield"
    BASELINE_SHIELD = "baseline_shield"
    OPTIMAL = "optimal"
    BEHAVIOR = "behavior"

    @property
    def shielded(self) -> bool:
        return self in (Method.SPIBB_SHIELD, Method.DUIPI_SHIELD, Method.BASELINE_SHIELD)


class EstimatorKind(str, Enum):
    """Point estimators for the transition function."""
    MLE = "mle"
    MAP = "map"
    DIRICHLET_MEAN = "dirichlet_mean"


class RunStatus(str, Enum):
    """Status of a single experiment run."""
    COMPLETED = "completed"
    FAILED = "failed"


class Mdp(BaseModel):
    """Explicit tabular MDP with labeled target and unsafe states.

    Transitions are stored as a CSR matrix of shape (S*A, S); row ``s*A + a``
    holds T(.|s,a). Rows of unavailable pairs are ignored.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    num_states: int = Field(gt=0, description="Number of states |S|")
    num_actions: int = Field(gt=0, description="Number of action indices |A|")
    initial_state: int = Field(ge=0, description="Initial state s0")
    available: np.ndarray = Field(description="(S, A) mask of available actions A(s)")
    transitions: sp.csr_matrix = Field(description="(S*A, S) transition probabilities")
    rewards: np.ndarray = Field(description="(S, A) rewards R(s, a)")
    discount: float = Field(ge=0.0, lt=1.0, description="Discount factor gamma")
    target_states: FrozenSet[int] = Field(default=frozenset(), description="Target states S_T")
    unsafe_states: FrozenSet[int] = Field(default=frozenset(), description="Unsafe states S_U")

    @field_validator("available", mode="before")
    @classmethod
    def _copy_available(cls, value):
        return _frozen_array(value, bool)

    @field_validator("rewards", mode="before")
    @classmethod
    def _copy_rewards(cls, value):
        return _frozen_array(value, float)

    @field_validator("transitions", mode="before")
    @classmethod
    def _copy_transitions(cls, value):
        return _csr(value)

    @model_validator(mode="after")
    def _check_structure(self) -> "Mdp":
        S, A = self.num_states, self.num_actions
        if self.available.shape != (S, A):
            raise InvalidInputError(f"available has shape {self.available.shape}, expected {(S, A)}")
        if self.rewards.shape != (S, A):
            raise InvalidInputError(f"rewards has shape {self.rewards.shape}, expected {(S, A)}")
        if self.transitions.shape != (S * A, S):
            raise InvalidInputError(f"transitions has shape {self.transitions.shape}, expected {(S * A, S)}")
        if self.initial_state >= S:
            raise InvalidInputError(f"initial state {self.initial_state} out of range")
        if not self.available.any(axis=1).all():
            empty = np.flatnonzero(~self.available.any(axis=1))
            raise InvalidInputError(f"states without available actions: {empty[:10].tolist()}")
        data = self.transitions.data
        if data.size and (data.min() < 0.0 or data.max() > 1.0 + PROB_TOL):
            raise InvalidInputError("transition probabilities must lie in [0, 1]")
        row_sums = np.asarray(self.transitions.sum(axis=1)).ravel()
        bad = np.abs(row_sums[self.available.ravel()] - 1.0) > PROB_TOL
        if bad.any():
            rows = np.flatnonzero(self.available.ravel())[bad]
            raise InvalidInputError(
                f"transition rows not stochastic for (s, a) pairs {[divmod(int(r), A) for r in rows[:5]]}"
            )
        if not np.isfinite(self.rewards).all():
            raise InvalidInputError("rewards must be finite")
        if self.target_states & self.unsafe_states:
            raise InvalidInputError("target and unsafe states must be disjoint")
        for state in self.target_states | self.unsafe_states:
            if not 0 <= state < S:
                raise InvalidInputError(f"labeled state {state} out of range")
        return self

    @property
    def target_mask(self) -> np.ndarray:
        mask = np.zeros(self.num_states, dtype=bool)
        mask[list(self.target_states)] = True
        return mask

    @property
    def unsafe_mask(self) -> np.ndarray:
        mask = np.zeros(self.num_states, dtype=bool)
        mask[list(self.unsafe_states)] = True
        return mask

    @property
    def r_max(self) -> float:
        return float(np.abs(self.rewards[self.available]).max())

    def actions(self, state: int) -> np.ndarray:
        """Available actions A(s)."""
        return np.flatnonzero(self.available[state])

    def successors(self, state: int, action: int) -> Dict[int, float]:
        """Sparse distribution T(.|s, a)."""
        row = self.transitions.getrow(state * self.num_actions + action)
        return {int(s): float(p) for s, p in zip(row.indices, row.data)}

    def replace(self, **updates: Any) -> "Mdp":
        """Return a validated copy with some fields replaced."""
        fields = {name: getattr(self, name) for name in type(self).model_fields}
        fields.update(updates)
        return type(self)(**fields)


class TabularPolicy(BaseModel):
    """Stochastic memoryless policy as an (S, A) matrix of action probabilities."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    probs: np.ndarray = Field(description="(S, A) action distribution per state")

    @field_validator("probs", mode="before")
    @classmethod
    def _copy_probs(cls, value):
        return _frozen_array(value, float)

    @model_validator(mode="after")
    def _check_stochastic(self) -> "TabularPolicy":
        if self.probs.ndim != 2:
            raise InvalidInputError("policy must be an (S, A) matrix")
        if not np.isfinite(self.probs).all() or self.probs.min(initial=0.0) < 0.0:
            raise InvalidInputError("policy probabilities must be finite and nonnegative")
        sums = self.probs.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > PROB_TOL):
            states = np.flatnonzero(np.abs(sums - 1.0) > PROB_TOL)
            raise InvalidInputError(f"policy rows do not sum to one at states {states[:10].tolist()}")
        return self

    @property
    def num_states(self) -> int:
        return self.probs.shape[0]

    @property
    def num_actions(self) -> int:
        return self.probs.shape[1]

    def support(self, state: int) -> np.ndarray:
        return np.flatnonzero(self.probs[state] > 0.0)


class ValueTable(BaseModel):
    """State values v and action values q of a policy."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    v: np.ndarray = Field(description="(S,) state values")
    q: np.ndarray = Field(description="(S, A) action values")


def _check_probability_table(v: np.ndarray, q: np.ndarray) -> None:
    tol = 1e-12
    if v.min(initial=0.0) < -tol or v.max(initial=0.0) > 1.0 + tol:
        raise InvalidInputError("reach-avoid values must lie in [0, 1]")
    if q.min(initial=0.0) < -tol or q.max(initial=0.0) > 1.0 + tol:
        raise InvalidInputError("reach-avoid action values must lie in [0, 1]")


class ReachAvoidTable(BaseModel):
    """Optimal reach-avoid probabilities on a known MDP."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    v: np.ndarray = Field(description="(S,) maximal reach-avoid probability")
    q: np.ndarray = Field(description="(S, A) reach-avoid probability per action")

    @model_validator(mode="after")
    def _check_range(self) -> "ReachAvoidTable":
        _check_probability_table(self.v, self.q)
        return self


class RobustReachAvoidTable(BaseModel):
    """Optimal worst-case reach-avoid probabilities of an interval MDP."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    v: np.ndarray = Field(description="(S,) robust reach-avoid probability")
    q: np.ndarray = Field(description="(S, A) robust reach-avoid probability per action")
    worst_case_witness: Optional[sp.csr_matrix] = Field(
        default=None, description="(S*A, S) distributions attaining the inner infimum"
    )

    @model_validator(mode="after")
    def _check_range(self) -> "RobustReachAvoidTable":
        _check_probability_table(self.v, self.q)
        return self


class Trajectory(BaseModel):
    """A single trajectory s0, a0, s1, ..., sH."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    states: np.ndarray
    actions: np.ndarray

    @field_validator("states", "actions", mode="before")
    @classmethod
    def _copy_indices(cls, value):
        return _frozen_array(value, np.int64)

    @model_validator(mode="after")
    def _check_lengths(self) -> "Trajectory":
        if self.states.ndim != 1 or self.actions.ndim != 1:
            raise InvalidInputError("trajectory arrays must be one-dimensional")
        if len(self.states) != len(self.actions) + 1:
            raise InvalidInputError("a trajectory holds one more state than actions")
        return self

    def __len__(self) -> int:
        return len(self.actions)


class Dataset(BaseModel):
    """Ordered collection of trajectories."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    trajectories: List[Trajectory] = Field(default_factory=list)
    episodic: bool = True
    seed: Optional[int] = None

    @property
    def total_transitions(self) -> int:
        return sum(len(t) for t in self.trajectories)

    def concat(self, other: "Dataset") -> "Dataset":
        return Dataset(
            trajectories=list(self.trajectories) + list(other.trajectories),
            episodic=self.episodic and other.episodic,
            seed=self.seed,
        )

    def check(self, mdp: Mdp) -> None:
        """Raise InvalidInputError unless every trajectory is consistent with mdp."""
        for index, trajectory in enumerate(self.trajectories):
            if trajectory.states[0] != mdp.initial_state:
                raise InvalidInputError(f"trajectory {index} does not start at the initial state")
            if trajectory.states.max(initial=0) >= mdp.num_states:
                raise InvalidInputError(f"trajectory {index} visits an unknown state")
            if len(trajectory) and trajectory.actions.max() >= mdp.num_actions:
                raise InvalidInputError(f"trajectory {index} uses an unknown action")
            if not mdp.available[trajectory.states[:-1], trajectory.actions].all():
                raise InvalidInputError(f"trajectory {index} takes an unavailable action")


class CountTable(BaseModel):
    """Occurrence counts N(s, a) and N(s, a, s')."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n_sa: np.ndarray = Field(description="(S, A) pair counts")
    n_sas: sp.csr_matrix = Field(description="(S*A, S) triple counts")

    @field_validator("n_sa", mode="before")
    @classmethod
    def _copy_n_sa(cls, value):
        return _frozen_array(value, np.int64)

    @field_validator("n_sas", mode="before")
    @classmethod
    def _copy_n_sas(cls, value):
        return _csr(value)

    @model_validator(mode="after")
    def _check_marginals(self) -> "CountTable":
        S, A = self.n_sa.shape
        if self.n_sas.shape != (S * A, S):
            raise InvalidInputError("triple counts do not match pair counts in shape")
        marginal = np.asarray(self.n_sas.sum(axis=1)).ravel()
        if not np.array_equal(marginal, self.n_sa.ravel()):
            raise InvalidInputError("triple counts do not sum to pair counts")
        return self

    @property
    def n_s(self) -> np.ndarray:
        return self.n_sa.sum(axis=1)


class TransitionGraph(BaseModel):
    """Known transition support: which successors exist for each (s, a).

    Stored as a CSR sparsity pattern over rows ``s*A + a``; per-transition
    arrays (interval bounds, variances) are aligned with ``indices``.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    num_states: int = Field(gt=0)
    num_actions: int = Field(gt=0)
    indptr: np.ndarray
    indices: np.ndarray

    @field_validator("indptr", "indices", mode="before")
    @classmethod
    def _copy_pattern(cls, value):
        return _frozen_array(value, np.int64)

    @model_validator(mode="after")
    def _check_pattern(self) -> "TransitionGraph":
        if len(self.indptr) != self.num_states * self.num_actions + 1:
            raise InvalidInputError("graph row pointer has the wrong length")
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= self.num_states):
            raise InvalidInputError("graph successor out of range")
        return self

    @classmethod
    def from_matrix(cls, matrix: sp.spmatrix) -> "TransitionGraph":
        """Graph of the nonzero entries of an (S*A, S) matrix."""
        pattern = sp.csr_matrix(matrix, copy=True)
        pattern.eliminate_zeros()
        pattern.sort_indices()
        S = pattern.shape[1]
        return cls(
            num_states=S,
            num_actions=pattern.shape[0] // S,
            indptr=pattern.indptr,
            indices=pattern.indices,
        )

    @property
    def num_transitions(self) -> int:
        return int(self.indices.size)

    @property
    def row_ids(self) -> np.ndarray:
        """Row index ``s*A + a`` of every graph entry."""
        return np.repeat(np.arange(len(self.indptr) - 1), np.diff(self.indptr))

    def support(self, state: int, action: int) -> np.ndarray:
        row = state * self.num_actions + action
        return self.indices[self.indptr[row]:self.indptr[row + 1]]

    def support_sizes(self) -> np.ndarray:
        """(S, A) number of successors per pair."""
        return np.diff(self.indptr).reshape(self.num_states, self.num_actions)

    def matrix(self, data: np.ndarray) -> sp.csr_matrix:
        """CSR matrix on this pattern holding ``data`` (explicit zeros kept)."""
        return sp.csr_matrix(
            (np.asarray(data, dtype=float), self.indices.copy(), self.indptr.copy()),
            shape=(self.num_states * self.num_actions, self.num_states),
        )

    def gather(self, matrix: sp.spmatrix) -> np.ndarray:
        """Values of ``matrix`` at every graph entry, aligned with ``indices``."""
        csr = sp.csr_matrix(matrix)
        return np.asarray(csr[self.row_ids, self.indices]).ravel()


class EstimatedModel(BaseModel):
    """Point estimate of the transition function."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    point_transitions: sp.csr_matrix = Field(description="(S*A, S) estimated T")
    estimator_kind: EstimatorKind
    alpha: Optional[float] = Field(default=None, description="Dirichlet prior parameter")

    @field_validator("point_transitions", mode="before")
    @classmethod
    def _copy_point(cls, value):
        return _csr(value)

    @model_validator(mode="after")
    def _check_rows(self) -> "EstimatedModel":
        sums = np.asarray(self.point_transitions.sum(axis=1)).ravel()
        nonempty = np.diff(self.point_transitions.indptr) > 0
        if self.estimator_kind == EstimatorKind.MLE:
            ok = (np.abs(sums - 1.0) <= PROB_TOL) | (sums == 0.0)
        else:
            ok = ~nonempty | (np.abs(sums - 1.0) <= PROB_TOL)
        if not ok.all():
            raise InvalidInputError(f"{self.estimator_kind.value} estimate has non-stochastic rows")
        return self


class IntervalMdp(BaseModel):
    """Interval MDP over a known graph with a confidence certificate."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    num_states: int = Field(gt=0)
    num_actions: int = Field(gt=0)
    initial_state: int = Field(ge=0)
    available: np.ndarray
    target_states: FrozenSet[int] = frozenset()
    unsafe_states: FrozenSet[int] = frozenset()
    graph: TransitionGraph
    lower: np.ndarray = Field(description="lower bounds aligned with graph entries")
    upper: np.ndarray = Field(description="upper bounds aligned with graph entries")
    point: np.ndarray = Field(description="point estimates aligned with graph entries")
    delta_total: float = Field(gt=0.0, lt=1.0, description="delta_I")
    delta_per_transition: float = Field(gt=0.0, lt=1.0, description="delta_T")
    floor: float = Field(gt=0.0, lt=1.0, description="xi")

    @field_validator("available", mode="before")
    @classmethod
    def _copy_available(cls, value):
        return _frozen_array(value, bool)

    @field_validator("lower", "upper", "point", mode="before")
    @classmethod
    def _copy_bounds(cls, value):
        return _frozen_array(value, float)

    @model_validator(mode="after")
    def _check_intervals(self) -> "IntervalMdp":
        n = self.graph.num_transitions
        if not (self.lower.shape == self.upper.shape == self.point.shape == (n,)):
            raise InvalidInputError("interval arrays must align with the graph")
        if self.available.shape != (self.num_states, self.num_actions):
            raise InvalidInputError("available mask has the wrong shape")
        tol = PROB_TOL
        if n and (self.lower.min() < self.floor - tol or self.upper.max() > 1.0 + tol):
            raise InvalidInputError("interval bounds must lie in [xi, 1]")
        if np.any(self.lower > self.upper + tol):
            raise InvalidInputError("interval lower bound exceeds upper bound")
        rows = np.flatnonzero(np.diff(self.graph.indptr) > 0)
        starts = self.graph.indptr[rows]
        low_sums = np.add.reduceat(self.lower, starts) if n else np.zeros(0)
        up_sums = np.add.reduceat(self.upper, starts) if n else np.zeros(0)
        if np.any(low_sums > 1.0 + tol) or np.any(up_sums < 1.0 - tol):
            raise InfeasibleIntervalError("interval polytope is empty for some (s, a)")
        return self

    @property
    def target_mask(self) -> np.ndarray:
        mask = np.zeros(self.num_states, dtype=bool)
        mask[list(self.target_states)] = True
        return mask

    @property
    def unsafe_mask(self) -> np.ndarray:
        mask = np.zeros(self.num_states, dtype=bool)
        mask[list(self.unsafe_states)] = True
        return mask

    def interval(self, state: int, action: int, successor: int) -> tuple:
        """(l, u) for a transition; (0, 0) when it is not in the graph."""
        row = state * self.num_actions + action
        lo, hi = self.graph.indptr[row], self.graph.indptr[row + 1]
        hits = np.flatnonzero(self.graph.indices[lo:hi] == successor)
        if not hits.size:
            return 0.0, 0.0
        k = lo + int(hits[0])
        return float(self.lower[k]), float(self.upper[k])


class Shield(BaseModel):
    """Per-state sets of allowed actions derived from robust reach-avoid scores."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    allowed: np.ndarray = Field(description="(S, A) mask of shield-allowed actions")
    available: np.ndarray = Field(description="(S, A) mask of actions of the shielded MDP")
    scores: np.ndarray = Field(description="(S, A) robust reach-avoid action values")
    theta: float = Field(ge=0.0, le=1.0)
    kappa: float = Field(ge=0.0, le=1.0)
    relaxed_states: FrozenSet[int] = frozenset()

    @field_validator("allowed", "available", mode="before")
    @classmethod
    def _copy_masks(cls, value):
        return _frozen_array(value, bool)

    @model_validator(mode="after")
    def _check_nonempty(self) -> "Shield":
        if self.allowed.shape != self.available.shape:
            raise InvalidInputError("allowed and available masks differ in shape")
        if not self.allowed.any(axis=1).all():
            raise InvalidInputError("shield leaves a state without allowed actions")
        if np.any(self.allowed & ~self.available):
            raise InvalidInputError("shield allows an unavailable action")
        return self

    def allowed_actions(self, state: int) -> np.ndarray:
        return np.flatnonzero(self.allowed[state])

    def unsafe_actions(self, state: int) -> np.ndarray:
        return np.flatnonzero(self.available[state] & ~self.allowed[state])


class BootstrappedSet(BaseModel):
    """State-action pairs on which SPIBB copies the baseline."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    membership: np.ndarray = Field(description="(S, A) mask of bootstrapped pairs")
    n_wedge: int
    shield_applied: bool = False

    @field_validator("membership", mode="before")
    @classmethod
    def _copy_membership(cls, value):
        return _frozen_array(value, bool)


class UncertainValueTable(BaseModel):
    """Action values with diagonal variance estimates and the penalized value U."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    q: np.ndarray
    var_q: np.ndarray
    v: np.ndarray
    var_v: np.ndarray
    u: np.ndarray

    @model_validator(mode="after")
    def _check_variances(self) -> "UncertainValueTable":
        if self.var_q.min(initial=0.0) < 0.0 or self.var_v.min(initial=0.0) < 0.0:
            raise InvalidInputError("variances must be nonnegative")
        return self


class Benchmark(BaseModel):
    """A benchmark MDP with its heuristic policy and graph knowledge."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    mdp: Mdp
    heuristic: TabularPolicy
    graph: TransitionGraph
    episodic: bool = True

    @model_validator(mode="after")
    def _check_consistency(self) -> "Benchmark":
        if self.heuristic.probs.shape != self.mdp.available.shape:
            raise InvalidInputError("heuristic shape does not match the MDP")
        if np.any((self.heuristic.probs > 0.0) & ~self.mdp.available):
            raise InvalidInputError("heuristic uses unavailable actions")
        if self.graph.num_transitions != self.mdp.transitions.nnz:
            raise InvalidInputError("graph does not match the MDP support")
        return self

    def behavior(self, epsilon: float) -> TabularPolicy:
        """Behaviour policy: epsilon * heuristic + (1 - epsilon) * uniform over A(s)."""
        from data_sources.estimators import mixture_baseline

        return mixture_baseline(self.heuristic, epsilon, self.mdp.available)


class ExperimentConfig(BaseModel):
    """Configuration of a dataset-size sweep."""

    env: str = Field(description="Benchmark name: random, wetchicken, frozenlake or pacman")
    env_params: Dict[str, Any] = Field(default_factory=dict, description="Benchmark constructor parameters")
    dataset_sizes: List[int] = Field(description="Dataset sizes (trajectories or transitions)")
    runs: int = Field(default=100, ge=1)
    seed: int = Field(default=0, ge=0)
    gamma: float = Field(default=0.95, ge=0.0, lt=1.0)
    epsilon: float = Field(default=0.5, ge=0.0, le=1.0, description="Baseline mixture weight")
    n_wedge: int = Field(default=3, ge=0, description="SPIBB count threshold")
    delta: float = Field(default=0.1, gt=0.0, lt=1.0, description="IMDP confidence delta_I")
    xi: float = Field(default=1e-8, gt=0.0, lt=1.0, description="Interval floor")
    alpha: float = Field(default=5.0, gt=1.0, description="Dirichlet prior parameter")
    theta: float = Field(default=0.2, ge=0.0, le=1.0, description="Safety threshold")
    kappa: float = Field(default=0.02, ge=0.0, le=1.0, description="Infeasibility relaxation")
    nu: float = Field(default=1.0, ge=0.0, description="DUIPI variance penalty")
    duipi_rounds: int = Field(default=300, ge=1)
    methods: List[Method] = Field(default_factory=lambda: [Method.SPIBB, Method.SPIBB_SHIELD])
    horizon: int = Field(default=200, ge=1)
    workers: int = Field(default=1, ge=1)
    record_timings: bool = False
    output: Optional[str] = None
    json_output: Optional[str] = None
    dump_shield: Optional[str] = None

    @field_validator("dataset_sizes")
    @classmethod
    def _check_sizes(cls, value: List[int]) -> List[int]:
        if not value or any(size < 1 for size in value):
            raise ValueError("dataset sizes must be a nonempty list of positive counts")
        return value

    @field_validator("methods")
    @classmethod
    def _check_methods(cls, value: List[Method]) -> List[Method]:
        if not value:
            raise ValueError("at least one method is required")
        return list(dict.fromkeys(value))


class RunRecord(BaseModel):
    """Outcome of one method on one dataset."""

    method: Method
    dataset_size: int
    run_index: int
    performance: Optional[float] = Field(default=None, description="rho(pi, M*) on the true MDP")
    theta_safe: Optional[bool] = None
    relaxed_state_count: int = 0
    wall_time: float = 0.0
    status: RunStatus = RunStatus.COMPLETED
    error: Optional[str] = None

    @field_validator("performance")
    @classmethod
    def _check_finite(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not np.isfinite(value):
            raise ValueError("performance must be finite")
        return value


class RunState(BaseModel):
    """State passed between the nodes of the per-run pipeline."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    # Inputs
    benchmark: Benchmark
    dataset: Dataset
    method: Method
    config: ExperimentConfig

    # Estimator output
    counts: Optional[CountTable] = None
    baseline: Optional[TabularPolicy] = None
    mle_mdp: Optional[Mdp] = None

    # Shield output
    shield: Optional[Shield] = None
    shielded_baseline: Optional[TabularPolicy] = None
    shielded_mle_mdp: Optional[Mdp] = None

    # Improver output
    policy: Optional[TabularPolicy] = None

    # Evaluation
    performance: Optional[float] = None
    theta_safe: Optional[bool] = None
    error: Optional[str] = None
