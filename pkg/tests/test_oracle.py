import math
import random

import pytest

from sdnadmit import LoadState, PhysicalNetwork, WeightParams, build_product, fold, realization_weight, serial_chain, simple_routing
from sdnadmit.net_model import exp_load_weights
from sdnadmit.oracle import EnumerationLimit, enumerate_paths, enumerate_realizations, find_realization, lightest_path, lightest_realization
from sdnadmit.harness import gen_random_instance

from _instances import random_weights

TRI_WEIGHTS = {"uw": 1.0, "wv": 1.0, "uv": 5.0, "w": 0.5}


def test_triangle_lightest_realization(triangle):
    net, req = triangle
    p, w = lightest_realization(net, req, TRI_WEIGHTS)
    assert p.nodes == ("u", "w", "v")
    assert p.placements() == [("a1", "w")]
    assert w == pytest.approx(2.5, abs=1e-12)


def test_triangle_enumeration(triangle):
    net, req = triangle
    ps = enumerate_realizations(net, req, weights=TRI_WEIGHTS)
    assert sorted(realization_weight(p, TRI_WEIGHTS) for p in ps) == [2.5, 7.5, 7.5, 12.5]
    assert enumerate_realizations(net, req, bound=2.4, weights=TRI_WEIGHTS) == []
    assert len(enumerate_realizations(net, req, bound=2.5, weights=TRI_WEIGHTS)) == 1


def test_budget_comparison_is_inclusive(single_edge):
    net, params = single_edge  # phi = 2, p_max = 1
    req = simple_routing("r", "u", "v", 1, 1)
    state = LoadState(net)
    state.add_flow("e", 30)  # weight 2**1 - 1 == benefit
    assert find_realization(net, req, state, params) is not None
    state.add_flow("e", 1)
    assert find_realization(net, req, state, params) is None


def test_unreachable_sink_gives_none():
    net = PhysicalNetwork.from_lists([("a", 9), ("b", 9), ("c", 9)], [("e", "a", "b", 9)])
    req = simple_routing("r", "a", "c", 1, 1)
    assert lightest_realization(net, req, {}) is None
    assert enumerate_realizations(net, req) == []


def test_benefit_below_weight_gives_none(single_edge):
    net, params = single_edge
    state = LoadState(net)
    state.add_flow("e", 59)
    req = simple_routing("r", "u", "v", 1, 1)
    assert find_realization(net, req, state, params) is None


def test_same_source_and_sink_node_routes_trivially():
    net = PhysicalNetwork.from_lists([("a", 50)], [])
    req = serial_chain([{"a"}], [1, 1], 1, source="a", sink="a")
    p, w = lightest_realization(net, req, {"a": 0.25})
    assert p.edges == () and p.placements() == [("a1", "a")]
    assert w == 0.25


def test_enumeration_cap_is_enforced():
    nodes = [(f"n{i}", 99) for i in range(7)]
    edges = [(f"e{i}{j}", f"n{i}", f"n{j}", 99) for i in range(7) for j in range(i + 1, 7)]
    net = PhysicalNetwork.from_lists(nodes, edges)
    with pytest.raises(EnumerationLimit):
        enumerate_realizations(net, simple_routing("r", "n0", "n6", 1, 1), cap=50)


def test_tie_break_is_deterministic():
    net = PhysicalNetwork.from_lists([("a", 9), ("b", 9), ("c", 9), ("d", 9)], [("ab", "a", "b", 9), ("bd", "b", "d", 9), ("ac", "a", "c", 9), ("cd", "c", "d", 9)])
    req = simple_routing("r", "a", "d", 1, 1)
    first = lightest_realization(net, req, {})
    for _ in range(5):
        assert lightest_realization(net, req, {}) == first
    assert first[0].nodes == ("a", "b", "d")


@pytest.mark.parametrize("seed", range(120))
def test_matches_brute_force_minimum(seed):
    rng = random.Random(1000 + seed)
    net, events, _ = gen_random_instance(1000 + seed, max_nodes=6, max_edges=9, max_requests=4)
    weights = random_weights(net, rng)
    for ev in events:
        if ev.kind != "arrival":
            continue
        req = ev.request
        pn, preq = build_product(net, req, weights)
        try:
            paths = enumerate_paths(pn, preq, cap=5000)
        except EnumerationLimit:
            continue
        found = lightest_path(pn, preq)
        if not paths:
            assert found is None
            continue
        best = min(w for _, w in paths)
        assert found is not None
        assert abs(found[0] - best) <= 1e-9 * max(1.0, best)
        assert abs(realization_weight(fold(found[1], req), weights) - found[0]) <= 1e-12 * max(1.0, found[0])


def test_weight_monotone_in_load(triangle):
    net, req = triangle
    params = WeightParams(p_max=6, b_max=3, k=2)
    state = LoadState(net)
    prev = -math.inf
    for _ in range(10):
        _, w = lightest_realization(net, req, exp_load_weights(state, params))
        assert w >= prev
        prev = w
        for z in ("uw", "wv", "uv", "w"):
            state.add_flow(z, 3)
