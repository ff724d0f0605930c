"""Delegation weights from trust propagation.

Every node starts with one unit of trust.  Non-representative nodes pass
the trust they hold along their normalized out-edges; representatives
(the active set) collect trust and never redistribute it.  When all
mobile trust has been absorbed, the weight of an active node is its own
unit plus everything that flowed to it, and the weights sum to the
population size.

Two interchangeable computations are provided:

* :func:`compute_weights_iterative` runs the redistribution sweeps
  directly until the mobile residual falls below a tolerance.
* :func:`compute_weights_exact` treats active nodes as absorbing states
  and solves the linear system for absorption probabilities in one shot.

Trust held by nodes with no directed path to any active node can never
be absorbed; the stranded policy decides whether that is an error or is
split evenly among the representatives.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .network import ActiveSet, TrustNetwork


class DelegationError(Exception):
    """Base class for weight-computation failures."""


class StrandedTrustError(DelegationError):
    """Some trust has no directed path to the active set and the policy is reject."""

    def __init__(self, stranded: list[int]):
        self.stranded = sorted(stranded)
        super().__init__(
            f"trust stranded at nodes with no path to any active node: {self.stranded}"
        )


class NoConvergenceError(DelegationError):
    """Residual mobile trust failed to drop below tolerance within the sweep budget."""


class SingularSystemError(DelegationError):
    """Defensive guard: the absorption system was reported singular."""


class StrandedPolicy(enum.Enum):
    """What to do with trust that cannot reach any active node."""

    REJECT = "reject"
    UNIFORM_TO_ACTIVE = "uniform"


@dataclass(frozen=True)
class PropagationConfig:
    """Termination and degeneracy knobs for the iterative sweeps."""

    tolerance: float = 1e-9
    max_iterations: int = 100_000
    stranded_policy: StrandedPolicy = StrandedPolicy.REJECT

    def __post_init__(self):
        if not (self.tolerance > 0.0):
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass(frozen=True)
class ReachabilityPartition:
    """Non-active nodes split by whether they can reach the active set."""

    transient: frozenset[int]
    stranded: frozenset[int]


@dataclass(frozen=True)
class WeightVector:
    """Delegation weight per active node.

    ``weights`` maps each active node id to its (possibly fractional)
    weight; weights include the stranded mass redistributed by policy, so
    they sum to the population size within tolerance.  ``stranded_mass``
    reports how much trust had no path to the active set and was handled
    by policy (0.0 when nothing was stranded).  ``iterations_used`` is
    the sweep count of the iterative path, None for the exact solver.
    """

    weights: dict[int, float]
    stranded_mass: float = 0.0
    iterations_used: int | None = None

    def total(self) -> float:
        return float(sum(self.weights.values()))


def reachability_partition(network: TrustNetwork, active: ActiveSet) -> ReachabilityPartition:
    """Split non-active nodes into transient (some directed path of
    positive normalized trust reaches an active node) and stranded (none
    does).  Dangling non-active nodes are always stranded."""
    _require_normalized(network)
    active.validate_for(network.n)
    positive = network.normalized_trust > 0.0
    src = network.edge_source[positive]
    tgt = network.edge_target[positive]
    # reverse-BFS from the active seeds over in-edges
    order = np.argsort(tgt, kind="stable")
    src, tgt = src[order], tgt[order]
    reached = set(active.members)
    frontier = deque(active.members)
    transient: set[int] = set()
    while frontier:
        v = frontier.popleft()
        lo = int(np.searchsorted(tgt, v, side="left"))
        hi = int(np.searchsorted(tgt, v, side="right"))
        for s in src[lo:hi]:
            s = int(s)
            if s not in reached:
                reached.add(s)
                transient.add(s)
                frontier.append(s)
    stranded = set(range(network.n)) - reached
    return ReachabilityPartition(frozenset(transient), frozenset(stranded))


def compute_weights_iterative(
    network: TrustNetwork,
    active: ActiveSet,
    config: PropagationConfig = PropagationConfig(),
    callback: Callable[[float], None] | None = None,
) -> WeightVector:
    """Propagate trust by synchronous sweeps until absorbed by the active set.

    Each active node keeps its own unit; each transient node starts with
    one mobile unit.  Per sweep, every transient node sends all trust it
    holds along its normalized out-edges simultaneously; trust arriving
    at active nodes is absorbed.  Sweeps stop when the total mobile trust
    drops below ``config.tolerance``.

    Parameters
    ----------
    network : TrustNetwork
        Must be normalized.
    active : ActiveSet
        Non-empty set of representative ids.
    config : PropagationConfig
        Tolerance, sweep budget, and stranded policy.
    callback : callable, optional
        Called with the mobile residual after every sweep (used to
        observe convergence).

    Raises
    ------
    StrandedTrustError
        Stranded nodes exist and the policy is REJECT.
    NoConvergenceError
        Sweep budget exhausted with residual still at or above tolerance.
    """
    transient_ids, active_ids, stranded_count = _prepare(network, active, config.stranded_policy)
    weights = np.ones(len(active_ids), dtype=np.float64)

    iterations = 0
    leaked = 0.0
    if transient_ids.size:
        to_transient, to_active, to_stranded = _flow_matrices(network, transient_ids, active_ids)
        mobile = np.ones(len(transient_ids), dtype=np.float64)
        residual = float(mobile.sum())
        converged = residual < config.tolerance
        while not converged and iterations < config.max_iterations:
            weights += to_active.T @ mobile
            leaked += float(to_stranded @ mobile)
            mobile = to_transient.T @ mobile
            residual = float(mobile.sum())
            iterations += 1
            if callback is not None:
                callback(residual)
            converged = residual < config.tolerance
        if not converged:
            raise NoConvergenceError(
                f"residual mobile trust {residual!r} after {iterations} sweeps "
                f"(tolerance {config.tolerance!r})"
            )

    stranded_mass = _fold_in_stranded(weights, stranded_count, leaked)
    return WeightVector(
        weights={int(a): float(w) for a, w in zip(active_ids, weights)},
        stranded_mass=stranded_mass,
        iterations_used=iterations,
    )


def compute_weights_exact(
    network: TrustNetwork,
    active: ActiveSet,
    stranded_policy: StrandedPolicy = StrandedPolicy.REJECT,
) -> WeightVector:
    """Closed-form delegation weights via the absorbing-chain linear system.

    With Q the transient-to-transient and R the transient-to-active
    blocks of the normalized trust matrix, the absorption probabilities
    X solve (I - Q) X = R, and the weight of active node a is
    ``1 + sum_t X[t, a]`` plus any stranded mass assigned by policy.
    After stranded nodes are removed every transient node reaches an
    absorber, so I - Q is nonsingular; a singular report is surfaced as
    :class:`SingularSystemError`.
    """
    transient_ids, active_ids, stranded_count = _prepare(network, active, stranded_policy)
    weights = np.ones(len(active_ids), dtype=np.float64)

    leaked = 0.0
    if transient_ids.size:
        to_transient, to_active, _ = _flow_matrices(network, transient_ids, active_ids)
        identity = np.eye(len(transient_ids))
        try:
            absorption = np.linalg.solve(identity - to_transient, to_active)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(f"absorption system reported singular: {exc}") from exc
        weights += absorption.sum(axis=0)
        # every transient unit is eventually absorbed or leaks into the
        # stranded region, so the leak is the mass the solve left over
        leaked = max(0.0, float(len(transient_ids) - absorption.sum()))

    stranded_mass = _fold_in_stranded(weights, stranded_count, leaked)
    return WeightVector(
        weights={int(a): float(w) for a, w in zip(active_ids, weights)},
        stranded_mass=stranded_mass,
        iterations_used=None,
    )


def _require_normalized(network: TrustNetwork) -> None:
    if not network.is_normalized:
        raise ValueError("network must be normalized (see normalize_outgoing)")


def _prepare(
    network: TrustNetwork, active: ActiveSet, policy: StrandedPolicy
) -> tuple[np.ndarray, np.ndarray, int]:
    """Partition nodes and apply the stranded policy's reject branch."""
    partition = reachability_partition(network, active)
    if partition.stranded and policy is StrandedPolicy.REJECT:
        raise StrandedTrustError(list(partition.stranded))
    transient_ids = np.array(sorted(partition.transient), dtype=np.int64)
    active_ids = active.sorted_ids()
    return transient_ids, active_ids, len(partition.stranded)


def _fold_in_stranded(weights: np.ndarray, stranded_count: int, leaked: float) -> float:
    """Split stranded mass (initial stranded units plus mass that leaked
    out of the transient region) evenly over the active weights.  Returns
    exactly 0.0 when nothing was structurally stranded."""
    if stranded_count == 0:
        # no stranded region exists, so nothing can leak; drop fp residue
        return 0.0
    stranded_mass = float(stranded_count) + leaked
    weights += stranded_mass / len(weights)
    return stranded_mass


def _flow_matrices(
    network: TrustNetwork, transient_ids: np.ndarray, active_ids: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense flow blocks for the transient rows of the normalized network.

    Returns (to_transient, to_active, to_stranded): row i describes where
    transient node ``transient_ids[i]``'s trust goes in one step, split
    into transient columns, active columns, and the total lost to the
    stranded region.
    """
    n = network.n
    t_count, a_count = len(transient_ids), len(active_ids)
    TRANSIENT, ACTIVE, STRANDED = 0, 1, 2
    kind = np.full(n, STRANDED, dtype=np.int8)
    kind[transient_ids] = TRANSIENT
    kind[active_ids] = ACTIVE
    position = np.zeros(n, dtype=np.int64)
    position[transient_ids] = np.arange(t_count)
    position[active_ids] = np.arange(a_count)

    norm = network.normalized_trust
    live = (norm > 0.0) & (kind[network.edge_source] == TRANSIENT)
    src = position[network.edge_source[live]]
    tgt_node = network.edge_target[live]
    tgt_kind = kind[tgt_node]
    w = norm[live]

    to_transient = np.zeros((t_count, t_count), dtype=np.float64)
    to_active = np.zeros((t_count, a_count), dtype=np.float64)
    to_stranded = np.zeros(t_count, dtype=np.float64)
    m = tgt_kind == TRANSIENT
    np.add.at(to_transient, (src[m], position[tgt_node[m]]), w[m])
    m = tgt_kind == ACTIVE
    np.add.at(to_active, (src[m], position[tgt_node[m]]), w[m])
    m = tgt_kind == STRANDED
    np.add.at(to_stranded, src[m], w[m])
    return to_transient, to_active, to_stranded
