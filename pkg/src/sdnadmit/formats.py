"""JSON formats for networks, requests, traces and decision logs.

Network::

    {"nodes": [{"id", "capacity"}], "edges": [{"id", "u", "v", "capacity"}]}

Request::

    {"id", "benefit",
     "vertices": [{"id", "role": "source|sink|action", "demand", "allowed_nodes"}],
     "edges": [{"id", "tail", "head", "demand", "allowed_edges"?}]}

Trace::

    {"params"?: {"k", "b_max", "p_max"}, "events": [{"t", "kind": "arrival|departure", "payload"}]}

where an arrival payload is a request object and a departure payload a request id.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from sdnadmit.errors import NetworkError, TraceError, ValidationError
from sdnadmit.net_model import Edge, PhysicalNetwork
from sdnadmit.request_model import PrEdge, PrGraph, Request


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, no spaces. Equal objects give equal bytes."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# -- network ---------------------------------------------------------------------


def network_to_dict(net: PhysicalNetwork) -> dict:
    return {
        "nodes": [{"id": v, "capacity": c} for v, c in net.nodes.items()],
        "edges": [{"id": e.id, "u": e.u, "v": e.v, "capacity": e.capacity} for e in net.edges.values()],
    }


def network_from_dict(data: Mapping) -> PhysicalNetwork:
    try:
        nodes = [(str(n["id"]), n["capacity"]) for n in data["nodes"]]
        edges = [(str(e["id"]), str(e["u"]), str(e["v"]), e["capacity"]) for e in data["edges"]]
    except (KeyError, TypeError) as exc:
        raise NetworkError(f"malformed network: {exc!r}") from None
    return PhysicalNetwork.from_lists(nodes, edges)


# -- request ---------------------------------------------------------------------


def request_to_dict(req: Request) -> dict:
    g = req.graph

    def role(x: str) -> str:
        return "source" if x == g.source else "sink" if x == g.sink else "action"

    edges = []
    for e in g.edges:
        item = {"id": e.id, "tail": e.tail, "head": e.head, "demand": req.edge_demand[e.id]}
        allowed = req.allowed_edges.get(e.id)
        if allowed is not None:
            item["allowed_edges"] = sorted(allowed)
        edges.append(item)
    return {
        "id": req.id,
        "benefit": req.benefit,
        "vertices": [
            {
                "id": x,
                "role": role(x),
                "demand": req.vertex_demand[x],
                "allowed_nodes": sorted(req.allowed_nodes[x]),
            }
            for x in g.vertices
        ],
        "edges": edges,
    }


def request_from_dict(data: Mapping) -> Request:
    try:
        vertices = list(data["vertices"])
        edges = list(data["edges"])
        rid = str(data["id"])
        benefit = data["benefit"]
        sources = [str(v["id"]) for v in vertices if v["role"] == "source"]
        sinks = [str(v["id"]) for v in vertices if v["role"] == "sink"]
        bad_roles = {v["role"] for v in vertices} - {"source", "sink", "action"}
        if bad_roles:
            raise ValidationError("malformed", f"unknown vertex roles {sorted(bad_roles)}")
        if len(sources) > 1:
            raise ValidationError("multiple-sources", f"request {rid!r} declares sources {sources}")
        if len(sinks) > 1:
            raise ValidationError("multiple-sinks", f"request {rid!r} declares sinks {sinks}")
        if not sources or not sinks:
            raise ValidationError("malformed", f"request {rid!r} needs one source and one sink")
        graph = PrGraph(
            tuple(str(v["id"]) for v in vertices),
            tuple(PrEdge(str(e["id"]), str(e["tail"]), str(e["head"])) for e in edges),
            sources[0],
            sinks[0],
        )
        return Request(
            id=rid,
            graph=graph,
            vertex_demand={str(v["id"]): v["demand"] for v in vertices},
            edge_demand={str(e["id"]): e["demand"] for e in edges},
            benefit=benefit,
            allowed_nodes={str(v["id"]): frozenset(str(n) for n in v["allowed_nodes"]) for v in vertices},
            allowed_edges={
                str(e["id"]): (frozenset(str(x) for x in e["allowed_edges"]) if e.get("allowed_edges") is not None else None)
                for e in edges
            },
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError("malformed", f"malformed request: {exc!r}") from None


# -- trace -----------------------------------------------------------------------


@dataclass(frozen=True)
class Event:
    t: int
    kind: str
    request_id: str
    request: Request | None = None

    @classmethod
    def arrival(cls, t: int, req: Request) -> Event:
        return cls(t, "arrival", req.id, req)

    @classmethod
    def departure(cls, t: int, request_id: str) -> Event:
        return cls(t, "departure", request_id)


def check_trace(events: Iterable[Event]) -> None:
    """Nondecreasing time; departures refer to arrived, not yet departed ids."""
    last = None
    live: set[str] = set()
    seen: set[str] = set()
    for ev in events:
        if isinstance(ev.t, bool) or not isinstance(ev.t, int) or ev.t < 0:
            raise TraceError(f"event time must be a natural number, got {ev.t!r}")
        if last is not None and ev.t < last:
            raise TraceError(f"time goes backwards at t={ev.t}")
        last = ev.t
        if ev.kind == "arrival":
            if ev.request_id in seen:
                raise TraceError(f"duplicate request id {ev.request_id!r}")
            seen.add(ev.request_id)
            live.add(ev.request_id)
        elif ev.kind == "departure":
            if ev.request_id not in live:
                raise TraceError(f"departure of unknown or departed request {ev.request_id!r}")
            live.discard(ev.request_id)
        else:
            raise TraceError(f"unknown event kind {ev.kind!r}")


def event_to_dict(ev: Event) -> dict:
    payload = request_to_dict(ev.request) if ev.kind == "arrival" else ev.request_id
    return {"t": ev.t, "kind": ev.kind, "payload": payload}


def event_from_dict(data: Mapping) -> Event:
    try:
        t, kind, payload = data["t"], data["kind"], data["payload"]
    except (KeyError, TypeError) as exc:
        raise TraceError(f"malformed event: {exc!r}") from None
    if kind == "arrival":
        req = request_from_dict(payload)
        return Event(t, kind, req.id, req)
    if kind == "departure":
        return Event(t, kind, str(payload))
    raise TraceError(f"unknown event kind {kind!r}")


def trace_to_dict(events: Iterable[Event], params: Mapping | None = None) -> dict:
    out: dict = {"events": [event_to_dict(e) for e in events]}
    if params:
        out["params"] = dict(params)
    return out


def trace_from_dict(data: Mapping | list) -> tuple[list[Event], dict]:
    if isinstance(data, list):
        raw, params = data, {}
    else:
        try:
            raw, params = data["events"], dict(data.get("params") or {})
        except (KeyError, TypeError) as exc:
            raise TraceError(f"malformed trace: {exc!r}") from None
    events = [event_from_dict(e) for e in raw]
    check_trace(events)
    return events, params


# -- files -----------------------------------------------------------------------


def _read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError("malformed", f"{path}: {exc}") from None


def load_network(path: str | Path) -> PhysicalNetwork:
    return network_from_dict(_read_json(path))


def load_trace(path: str | Path) -> tuple[list[Event], dict]:
    return trace_from_dict(_read_json(path))


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(dumps(obj) + "\n", encoding="utf-8")


def decision_log_lines(log: Iterable[Mapping]) -> str:
    return "".join(dumps(entry) + "\n" for entry in log)


def parse_decision_log(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]
