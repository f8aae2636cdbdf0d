from fractions import Fraction

import pytest

from sdnadmit import LoadState, PhysicalNetwork, Realization, WeightParams, serial_chain, simple_routing
from sdnadmit.allocator import allocate, commit, free
from sdnadmit.errors import AccountingError, CapacityViolation
from sdnadmit.net_model import exp_load


def _req(i):
    return simple_routing(f"r{i}", "u", "v", 10, 1)


def test_empty_system_accepts(triangle):
    net, req = triangle
    state = LoadState(net)
    p = allocate(req, state, net, WeightParams(p_max=6, b_max=3, k=2))
    assert p is not None
    assert sum(state.flow.values()) == 3  # two edges and one action, demand 1 each
    state.check()


def test_single_edge_hand_simulation(single_edge):
    net, params = single_edge
    state = LoadState(net)
    for i in range(1, 5):
        before = exp_load(state, params, "e")
        assert before <= 1.0
        assert allocate(_req(i), state, net, params) is not None
    assert before == 1.0  # weight seen by request 4 is 2**(3/3) - 1
    assert state.load("e") == Fraction(4, 6)
    assert exp_load(state, params, "e") == pytest.approx(2 ** (4 / 3) - 1, rel=1e-12)
    digest = state.digest()
    assert allocate(_req(5), state, net, params) is None
    assert state.digest() == digest


def test_free_after_hand_simulation(single_edge):
    net, params = single_edge
    state = LoadState(net)
    ps = [allocate(_req(i), state, net, params) for i in range(1, 5)]
    free(_req(1), ps[0], state)
    assert state.load("e") == Fraction(3, 6)
    state.check()


def test_multiplicity_two_edge_charge():
    net = PhysicalNetwork.from_lists([("u", 50), ("v", 50), ("w", 50)], [("uv", "u", "v", 50), ("vw", "v", "w", 50)])
    # action at w, then come back to v: edge vw is walked twice
    req = serial_chain([{"w"}], [3, 3], 1, source="u", sink="v")
    p = Realization(("u", "v", "w", "v"), ("uv", "vw", "vw"), ("s", "a1", "t"), ("e1", "e2"), (0, 2, 3))
    state = LoadState(net)
    commit(req, p, state)
    assert state.flow["vw"] == 6
    assert state.flow["uv"] == 3 and state.flow["w"] == 3
    state.check()


def test_allocate_free_round_trip_is_exact(triangle):
    net, req = triangle
    state = LoadState(net)
    other = simple_routing("o", "u", "v", 7, 1)
    allocate(other, state, net, WeightParams(6, 3, 2))
    snapshot = state.copy()
    digest = state.digest()
    p = allocate(req, state, net, WeightParams(6, 3, 2))
    free(req, p, state)
    assert state.digest() == digest
    assert state.flow == snapshot.flow and state.allocations == snapshot.allocations


def test_free_unallocated_raises(triangle):
    net, req = triangle
    state = LoadState(net)
    p = Realization(("u", "w", "v"), ("uw", "wv"), ("s", "a1", "t"), ("e1", "e2"), (0, 1, 2))
    with pytest.raises(AccountingError):
        free(req, p, state)


def test_double_free_raises(triangle):
    net, req = triangle
    state = LoadState(net)
    p = allocate(req, state, net, WeightParams(6, 3, 2))
    free(req, p, state)
    with pytest.raises(AccountingError):
        free(req, p, state)


def test_free_with_other_realization_raises(triangle):
    net, req = triangle
    state = LoadState(net)
    p = allocate(req, state, net, WeightParams(6, 3, 2))
    q = Realization(("u", "v", "w", "v"), ("uv", "wv", "wv"), ("s", "a1", "t"), ("e1", "e2"), (0, 2, 3))
    assert q != p
    with pytest.raises(AccountingError):
        free(req, q, state)


def test_commit_over_capacity_is_atomic(single_edge):
    net, _ = single_edge
    state = LoadState(net)
    state.add_flow("e", 55)
    digest = state.digest()
    p = Realization(("u", "v"), ("e",), ("s", "t"), ("e1",), (0, 1))
    with pytest.raises(CapacityViolation):
        commit(_req(9), p, state)
    assert state.digest() == digest
