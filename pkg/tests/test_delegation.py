import numpy as np
import pytest

from proxyvote import (
    ActiveSet,
    NoConvergenceError,
    PropagationConfig,
    StrandedPolicy,
    StrandedTrustError,
    TrustNetwork,
    compute_weights_exact,
    compute_weights_iterative,
    generate_network,
    normalize_outgoing,
    reachability_partition,
)
from conftest import random_instance

UNIFORM = PropagationConfig(stranded_policy=StrandedPolicy.UNIFORM_TO_ACTIVE)


def _net(opinions, edges):
    net, _ = normalize_outgoing(TrustNetwork.from_edges(opinions, edges))
    return net


def test_four_node_weights_both_solvers(four_node, four_node_active):
    iterative = compute_weights_iterative(four_node, four_node_active)
    exact = compute_weights_exact(four_node, four_node_active)
    for vector in (iterative, exact):
        assert vector.weights[2] == pytest.approx(1.5, abs=1e-12)
        assert vector.weights[3] == pytest.approx(2.5, abs=1e-12)
        assert vector.stranded_mass == 0.0
    assert iterative.iterations_used == 2
    assert exact.iterations_used is None


def test_all_active_identity():
    net = generate_network(12, 3, np.random.default_rng(4))
    active = ActiveSet(range(12))
    vector = compute_weights_iterative(net, active)
    assert all(w == 1.0 for w in vector.weights.values())
    assert vector.iterations_used == 0
    exact = compute_weights_exact(net, active)
    assert all(w == 1.0 for w in exact.weights.values())


def test_chain_single_absorber_collects_everything():
    net = _net([0.1, 0.2, 0.3], [(0, 1, 0.9), (1, 2, 0.9)])
    vector = compute_weights_iterative(net, ActiveSet([2]))
    assert vector.weights[2] == pytest.approx(3.0, abs=1e-9)


def test_star_center_absorbs_in_one_step():
    k = 7
    opinions = [0.5] * (k + 1)
    edges = [(i, 0, 0.8) for i in range(1, k + 1)]
    net = _net(opinions, edges)
    vector = compute_weights_exact(net, ActiveSet([0]))
    assert vector.weights[0] == pytest.approx(k + 1, abs=1e-12)


def test_reachability_four_node(four_node, four_node_active):
    part = reachability_partition(four_node, four_node_active)
    assert part.transient == {0, 1}
    assert part.stranded == frozenset()


def test_reachability_isolated_node_is_stranded():
    net = _net([0.5, 0.25, 0.75], [(0, 1, 0.75), (1, 0, 0.75)])
    part = reachability_partition(net, ActiveSet([1]))
    assert part.transient == {0}
    assert part.stranded == {2}


def test_reachability_all_active_is_empty():
    net = generate_network(6, 2, np.random.default_rng(0))
    part = reachability_partition(net, ActiveSet(range(6)))
    assert part.transient == frozenset() and part.stranded == frozenset()


def test_reachability_ignores_zero_trust_edges():
    # the only route from 0 runs over a zero-weight edge, so 0 is stranded
    net = _net([0.5, 0.5, 0.5], [(0, 1, 0.0), (0, 2, 0.0), (1, 2, 0.9)])
    part = reachability_partition(net, ActiveSet([2]))
    assert part.stranded == {0}
    assert part.transient == {1}


def test_stranded_pair_reject_and_uniform():
    net = _net([0.6, 0.4, 0.2, 1.0], [(0, 1, 1.0), (1, 0, 1.0)])
    active = ActiveSet([2, 3])
    with pytest.raises(StrandedTrustError) as excinfo:
        compute_weights_iterative(net, active)
    assert excinfo.value.stranded == [0, 1]
    with pytest.raises(StrandedTrustError):
        compute_weights_exact(net, active)
    # hand trace: both stranded units split evenly over the two actives
    for vector in (
        compute_weights_iterative(net, active, UNIFORM),
        compute_weights_exact(net, active, StrandedPolicy.UNIFORM_TO_ACTIVE),
    ):
        assert vector.weights[2] == pytest.approx(2.0, abs=1e-12)
        assert vector.weights[3] == pytest.approx(2.0, abs=1e-12)
        assert vector.stranded_mass == pytest.approx(2.0, abs=1e-12)


def test_transient_mass_leaking_into_stranded_region_is_redistributed():
    # node 0 reaches the active node but half its trust drains into the
    # stranded 1<->2 cycle; conservation must still hold
    net = _net(
        [0.5, 0.5, 0.5, 0.5],
        [(0, 3, 0.5), (0, 1, 0.5), (1, 2, 1.0), (2, 1, 1.0)],
    )
    active = ActiveSet([3])
    for vector in (
        compute_weights_iterative(net, active, UNIFORM),
        compute_weights_exact(net, active, StrandedPolicy.UNIFORM_TO_ACTIVE),
    ):
        assert vector.weights[3] == pytest.approx(4.0, abs=1e-12)
        assert vector.stranded_mass == pytest.approx(2.5, abs=1e-12)
    with pytest.raises(StrandedTrustError):
        compute_weights_iterative(net, active)


def test_conservation_and_lower_bound_random_instances():
    rng = np.random.default_rng(42)
    for _ in range(60):
        net, active = random_instance(rng, max_n=60)
        iterative = compute_weights_iterative(net, active, UNIFORM)
        exact = compute_weights_exact(net, active, StrandedPolicy.UNIFORM_TO_ACTIVE)
        assert abs(iterative.total() - net.n) <= 1e-6
        assert abs(exact.total() - net.n) <= 1e-9
        assert min(iterative.weights.values()) >= 1.0 - 1e-9
        assert min(exact.weights.values()) >= 1.0 - 1e-9


def test_iterative_matches_exact_on_seeded_instance():
    rng = np.random.default_rng(1234)
    net = generate_network(50, 3, rng)
    active = ActiveSet(rng.choice(50, size=5, replace=False))
    iterative = compute_weights_iterative(net, active, UNIFORM)
    exact = compute_weights_exact(net, active, StrandedPolicy.UNIFORM_TO_ACTIVE)
    for node in active:
        assert iterative.weights[node] == pytest.approx(exact.weights[node], abs=1e-6)


def test_weights_match_monte_carlo_random_walks():
    # third route, independent of the shared flow-matrix assembly: walk
    # each non-active unit along edges sampled straight from the edge
    # lists until an active node absorbs it
    rng = np.random.default_rng(2718)
    net = generate_network(12, 3, rng)
    active = ActiveSet([1, 6, 9])
    exact = compute_weights_exact(net, active)

    k = 3
    cdf = np.zeros((12, k))
    targets = np.zeros((12, k), dtype=np.int64)
    for node in range(12):
        edges = net.edges_from(node)
        cdf[node] = np.cumsum([e.normalized_trust for e in edges])
        targets[node] = [e.target for e in edges]

    walkers_per_node = 40_000
    transient = [i for i in range(12) if i not in active]
    position = np.repeat(transient, walkers_per_node)
    is_active = np.zeros(12, dtype=bool)
    is_active[list(active)] = True
    moving = ~is_active[position]
    while moving.any():
        at = position[moving]
        u = rng.random(len(at))
        pick = (u[:, None] > cdf[at]).sum(axis=1).clip(max=k - 1)
        position[moving] = targets[at, pick]
        moving = ~is_active[position]

    for node in active:
        estimate = 1.0 + np.count_nonzero(position == node) / walkers_per_node
        # ~4 sigma band for the summed binomial estimates
        sigma = len(transient) * 0.5 / np.sqrt(walkers_per_node * len(transient))
        assert abs(estimate - exact.weights[node]) < 4 * sigma


def test_permutation_equivariance():
    rng = np.random.default_rng(9)
    for _ in range(10):
        net, active = random_instance(rng, max_n=30)
        perm = rng.permutation(net.n)
        relabeled = TrustNetwork(
            net.opinions[np.argsort(perm)],
            perm[net.edge_source],
            perm[net.edge_target],
            net.raw_trust,
        )
        relabeled, _ = normalize_outgoing(relabeled)
        mapped_active = ActiveSet(int(perm[a]) for a in active)
        base = compute_weights_exact(net, active, StrandedPolicy.UNIFORM_TO_ACTIVE)
        moved = compute_weights_exact(relabeled, mapped_active, StrandedPolicy.UNIFORM_TO_ACTIVE)
        for node in active:
            assert moved.weights[int(perm[node])] == pytest.approx(
                base.weights[node], abs=1e-9
            )


def test_raw_scale_invariance_of_weights():
    rng = np.random.default_rng(10)
    net = generate_network(20, 3, rng)
    active = ActiveSet(rng.choice(20, size=4, replace=False))
    base = compute_weights_exact(net, active)
    raw = net.raw_trust.copy()
    node = int(rng.integers(0, 20))
    lo, hi = net.out_slice(node)
    raw[lo:hi] *= 37.5
    scaled, _ = normalize_outgoing(
        TrustNetwork(net.opinions, net.edge_source, net.edge_target, raw)
    )
    rescored = compute_weights_exact(scaled, active)
    for node_id, w in base.weights.items():
        assert rescored.weights[node_id] == pytest.approx(w, abs=1e-9)


def test_residual_monotone_decreasing():
    rng = np.random.default_rng(11)
    for _ in range(10):
        n = int(rng.integers(5, 40))
        net = generate_network(n, min(3, n - 1), rng)
        active = ActiveSet(rng.choice(n, size=int(rng.integers(1, n)), replace=False))
        if reachability_partition(net, active).stranded:
            continue
        residuals: list[float] = []
        compute_weights_iterative(net, active, callback=residuals.append)
        previous = float(n - len(active))
        for value in residuals:
            assert value <= previous
            if previous >= 1e-9:
                assert value < previous
            previous = value


def test_singular_report_is_wrapped(four_node, four_node_active, monkeypatch):
    from proxyvote import SingularSystemError, delegation

    def boom(*args, **kwargs):
        raise np.linalg.LinAlgError("synthetic singular matrix")

    monkeypatch.setattr(delegation.np.linalg, "solve", boom)
    with pytest.raises(SingularSystemError):
        compute_weights_exact(four_node, four_node_active)


def test_no_convergence_when_budget_too_small():
    net = _net([0.1, 0.2, 0.3], [(0, 1, 0.9), (1, 2, 0.9)])
    tight = PropagationConfig(max_iterations=1)
    with pytest.raises(NoConvergenceError):
        compute_weights_iterative(net, ActiveSet([2]), tight)


def test_iterative_final_residual_below_tolerance(four_node, four_node_active):
    residuals: list[float] = []
    config = PropagationConfig(tolerance=1e-12)
    compute_weights_iterative(four_node, four_node_active, config, callback=residuals.append)
    assert residuals[-1] < 1e-12


def test_propagation_config_validation():
    with pytest.raises(ValueError):
        PropagationConfig(tolerance=0.0)
    with pytest.raises(ValueError):
        PropagationConfig(tolerance=-1e-9)
    with pytest.raises(ValueError):
        PropagationConfig(max_iterations=0)


def test_unnormalized_network_rejected(four_node_active):
    raw = TrustNetwork.from_edges(
        [0.8, 0.8, 0.5, 0.9], [(0, 1, 1.0), (1, 2, 0.25), (1, 3, 0.75)]
    )
    with pytest.raises(ValueError):
        compute_weights_iterative(raw, four_node_active)


def test_active_out_of_range_rejected(four_node):
    with pytest.raises(ValueError):
        compute_weights_exact(four_node, ActiveSet([2, 99]))
