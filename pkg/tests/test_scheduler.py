import random

import pytest

from sdnadmit import PhysicalNetwork, WeightParams, simple_routing
from sdnadmit.errors import TraceError
from sdnadmit.harness import gen_random_instance
from sdnadmit.scheduler import Scheduler


def _req(i, benefit=1, demand=10):
    return simple_routing(f"r{i}", "u", "v", demand, benefit)


def _hand(single_edge, retry_order="fifo"):
    net, params = single_edge
    s = Scheduler(net, params, retry_order=retry_order, check_invariants=True)
    decisions = [s.on_arrival(_req(i), i - 1) for i in range(1, 7)]
    return s, decisions


def test_hand_scenario_arrivals(single_edge):
    s, decisions = _hand(single_edge)
    assert [d.accepted for d in decisions] == [True] * 4 + [False, False]
    assert [r.id for r in s.standby] == ["r5", "r6"]
    assert s.benefit_at(3) == 4 and s.benefit_at(5) == 4


def test_hand_scenario_departure_accepts_r5(single_edge):
    s, _ = _hand(single_edge)
    assert s.on_departure("r1", 6) == ["r5"]
    assert [r.id for r in s.standby] == ["r6"]
    assert s.log[-1] == {
        "t": 6,
        "event": "departure",
        "request": "r5",
        "decision": "accept",
        "realization": {"walk": ["u", "e", "v"], "pr_path": ["s", "e1", "t"], "segmentation": [0, 1]},
        "trigger": "r1",
    }
    assert s.standby_is_complete()


def test_standby_departure_leaves_flows(single_edge):
    s, _ = _hand(single_edge)
    digest = s.state.digest()
    assert s.on_departure("r6", 6) == []
    assert s.state.digest() == digest
    assert [r.id for r in s.standby] == ["r5"]


def test_departure_with_empty_standby(single_edge):
    net, params = single_edge
    s = Scheduler(net, params)
    s.on_arrival(_req(1), 0)
    assert s.on_departure("r1", 1) == []
    assert s.current_benefit() == 0


def test_duplicate_and_unknown_ids(single_edge):
    net, params = single_edge
    s = Scheduler(net, params)
    s.on_arrival(_req(1), 0)
    with pytest.raises(TraceError):
        s.on_arrival(_req(1), 1)
    with pytest.raises(TraceError):
        s.on_departure("nope", 1)
    s.on_departure("r1", 1)
    with pytest.raises(TraceError):
        s.on_departure("r1", 2)


def test_time_cannot_go_backwards(single_edge):
    net, params = single_edge
    s = Scheduler(net, params)
    s.on_arrival(_req(1), 5)
    with pytest.raises(TraceError):
        s.on_arrival(_req(2), 4)


def test_unroutable_request_stays_on_standby():
    net = PhysicalNetwork.from_lists([("a", 99), ("b", 99), ("c", 99)], [("ab", "a", "b", 99)])
    s = Scheduler(net, WeightParams(3, 1, 1))
    s.on_arrival(simple_routing("x", "a", "c", 1, 1), 0)
    s.on_arrival(simple_routing("y", "a", "b", 1, 1), 0)
    s.on_departure("y", 1)
    assert [r.id for r in s.standby] == ["x"]


def test_benefit_at_sums_and_defaults():
    net = PhysicalNetwork.from_lists([("a", 99), ("b", 99)], [("ab", "a", "b", 99)])
    s = Scheduler(net, WeightParams(2, 3, 1))
    assert s.benefit_at(0) == 0
    s.on_arrival(simple_routing("r1", "a", "b", 1, 2), 2)
    s.on_arrival(simple_routing("r2", "a", "b", 1, 3), 2)
    assert s.benefit_at(1) == 0 and s.benefit_at(2) == 5 and s.benefit_at(100) == 5


def _retry_setup(order):
    # b_max = 11 on one edge of capacity 600: b=10 fits up to flow ~408, b=11 up to ~422
    net = PhysicalNetwork.from_lists([("u", 600), ("v", 600)], [("e", "u", "v", 600)])
    s = Scheduler(net, WeightParams(1, 11, 1), retry_order=order, check_invariants=True)
    s.on_arrival(simple_routing("big", "u", "v", 30, 11), 0)
    i = 0
    while s.on_arrival(simple_routing(f"f{i}", "u", "v", 10, 11), 1).accepted:
        i += 1
    s.on_departure(f"f{i}", 1)
    assert s.state.flow["e"] == 430
    s.on_arrival(simple_routing("ra", "u", "v", 10, 10), 2)
    s.on_arrival(simple_routing("rb", "u", "v", 10, 11), 2)
    s.on_arrival(simple_routing("rc", "u", "v", 5, 10), 2)
    return s


@pytest.mark.parametrize(
    "order,expected",
    [("fifo", ["ra", "rb"]), ("benefit", ["rb"]), ("density", ["rc", "rb"])],
)
def test_retry_orders(order, expected):
    s = _retry_setup(order)
    assert [r.id for r in s.standby] == ["ra", "rb", "rc"]
    assert s.on_departure("big", 3) == expected
    assert s.standby_is_complete()


def test_bad_retry_order(single_edge):
    net, params = single_edge
    with pytest.raises(ValueError):
        Scheduler(net, params, retry_order="lifo")


def _replay(events, net, params):
    s = Scheduler(net, WeightParams(params["p_max"], params["b_max"], params["k"]), check_invariants=True)
    responses = {}
    for ev in events:
        if ev.kind == "arrival":
            n_before = len(s.log)
            s.on_arrival(ev.request, ev.t)
            responses[ev.request_id] = s.log[n_before:]
        else:
            s.on_departure(ev.request_id, ev.t)
    return s, responses


@pytest.mark.parametrize("seed", range(40))
def test_service_model(seed):
    net, events, params = gen_random_instance(seed)
    s, responses = _replay(events, net, params)
    # one immediate response per arrival
    assert all(len(r) == 1 and r[0]["decision"] in ("accept", "standby") for r in responses.values())
    # accepted realizations never change before departure
    accepted_with = {}
    for entry in s.log:
        if entry["decision"] == "accept":
            assert entry["request"] not in accepted_with
            accepted_with[entry["request"]] = entry["realization"]
    s2, _ = _replay(events, net, params)
    assert s2.log == s.log


@pytest.mark.parametrize("seed", range(40))
def test_standby_complete_after_every_departure(seed):
    net, events, params = gen_random_instance(seed)
    s = Scheduler(net, WeightParams(params["p_max"], params["b_max"], params["k"]))
    for ev in events:
        if ev.kind == "arrival":
            s.on_arrival(ev.request, ev.t)
        else:
            s.on_departure(ev.request_id, ev.t)
            assert s.standby_is_complete()


@pytest.mark.parametrize("seed", range(20))
def test_continuous_service(seed):
    net, events, params = gen_random_instance(seed)
    s, _ = _replay(events, net, params)
    served_from, served_until = {}, {}
    for entry in s.log:
        if entry["decision"] == "accept":
            served_from[entry["request"]] = entry["t"]
        elif entry["decision"] == "depart" and entry["request"] in served_from:
            served_until[entry["request"]] = entry["t"]
    benefits = {ev.request_id: ev.request.benefit for ev in events if ev.kind == "arrival"}
    horizon = max(ev.t for ev in events)
    for t in range(horizon + 1):
        expected = sum(
            benefits[r] for r, t0 in served_from.items() if t0 <= t < served_until.get(r, horizon + 1)
        )
        assert s.benefit_at(t) == expected
