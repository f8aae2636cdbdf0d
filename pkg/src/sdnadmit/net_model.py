"""Physical network, per-resource flow accounting and exp-load weights.

Resources are identified by plain string ids. Node ids and edge ids share one
namespace, so a network must not reuse an id across the two kinds.
"""

from __future__ import annotations

import hashlib
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from sdnadmit.errors import AccountingError, CapacityViolation, NetworkError


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    capacity: int

    def other(self, node: str) -> str:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise KeyError(f"node {node!r} is not an endpoint of edge {self.id!r}")


def _check_capacity(kind: str, ident: str, capacity: object) -> int:
    if isinstance(capacity, bool) or not isinstance(capacity, int) or capacity < 1:
        raise NetworkError(f"{kind} {ident!r}: capacity must be a positive integer, got {capacity!r}")
    return capacity


class PhysicalNetwork:
    """Static undirected multigraph with integral node and edge capacities."""

    def __init__(self, nodes: Mapping[str, int], edges: Iterable[Edge]) -> None:
        self.nodes: dict[str, int] = {}
        for node_id, cap in nodes.items():
            self.nodes[node_id] = _check_capacity("node", node_id, cap)

        self.edges: dict[str, Edge] = {}
        for edge in edges:
            if edge.id in self.edges:
                raise NetworkError(f"duplicate edge id {edge.id!r}")
            if edge.id in self.nodes:
                raise NetworkError(f"edge id {edge.id!r} collides with a node id")
            for end in (edge.u, edge.v):
                if end not in self.nodes:
                    raise NetworkError(f"edge {edge.id!r}: unknown endpoint {end!r}")
            _check_capacity("edge", edge.id, edge.capacity)
            self.edges[edge.id] = edge

        # incident edges per node, sorted by edge id for deterministic iteration
        self._incident: dict[str, list[Edge]] = {v: [] for v in self.nodes}
        for edge in sorted(self.edges.values(), key=lambda e: e.id):
            self._incident[edge.u].append(edge)
            if edge.v != edge.u:
                self._incident[edge.v].append(edge)

    @classmethod
    def from_lists(
        cls,
        nodes: Iterable[tuple[str, int]],
        edges: Iterable[tuple[str, str, str, int]],
    ) -> PhysicalNetwork:
        """Build from ``(id, capacity)`` and ``(id, u, v, capacity)`` tuples."""
        node_map: dict[str, int] = {}
        for node_id, cap in nodes:
            if node_id in node_map:
                raise NetworkError(f"duplicate node id {node_id!r}")
            node_map[node_id] = cap
        return cls(node_map, [Edge(*e) for e in edges])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhysicalNetwork):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    def __repr__(self) -> str:
        return f"PhysicalNetwork(|V|={len(self.nodes)}, |E|={len(self.edges)})"

    def incident(self, node: str) -> list[Edge]:
        return self._incident[node]

    def resources(self) -> list[str]:
        return [*self.nodes, *self.edges]

    def capacity(self, z: str) -> int:
        if z in self.nodes:
            return self.nodes[z]
        try:
            return self.edges[z].capacity
        except KeyError:
            raise KeyError(f"unknown resource {z!r}") from None

    def is_node(self, z: str) -> bool:
        return z in self.nodes

    def min_capacity(self) -> int:
        return min(self.capacity(z) for z in self.resources())

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        start = next(iter(self.nodes))
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for e in self._incident[v]:
                w = e.other(v)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.nodes)


@dataclass(frozen=True)
class WeightParams:
    """Bounds the exp-load weights are calibrated against.

    ``p_max`` bounds realization length in resources, ``b_max`` the per-step
    benefit of any request and ``k`` the longest simple source-sink PR-path.
    """

    p_max: int
    b_max: int
    k: int

    def __post_init__(self) -> None:
        for name in ("p_max", "b_max", "k"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")

    @classmethod
    def for_network(cls, net: PhysicalNetwork, k: int, b_max: int, p_max: int | None = None) -> WeightParams:
        return cls(p_max=p_max if p_max is not None else len(net.nodes) * k, b_max=b_max, k=k)

    @property
    def phi(self) -> float:
        return math.log2(3 * self.p_max * self.b_max + 1)

    def demand_bound(self, capacity: int) -> float:
        """Largest demand a resource of this capacity admits under the small-demand rule."""
        return capacity / (3 * self.k * self.phi)


@dataclass
class LoadState:
    """Exact per-resource flow plus the per-request charges that produced it."""

    net: PhysicalNetwork
    flow: dict[str, int | Fraction] = field(default_factory=dict)
    allocations: dict[str, dict[str, int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for z in self.net.resources():
            self.flow.setdefault(z, 0)

    def load(self, z: str) -> Fraction:
        return Fraction(self.flow[z]) / self.net.capacity(z)

    def add_flow(self, z: str, amount: int | Fraction) -> None:
        if z not in self.flow:
            raise KeyError(f"unknown resource {z!r}")
        new = self.flow[z] + amount
        if new < 0:
            raise AccountingError(f"flow on {z!r} would become negative ({new})")
        if new > self.net.capacity(z):
            raise CapacityViolation(f"flow on {z!r} would exceed capacity ({new} > {self.net.capacity(z)})")
        self.flow[z] = new

    def check(self) -> None:
        """Capacity and conservation check; raises on the first discrepancy."""
        expected: dict[str, int | Fraction] = {z: 0 for z in self.flow}
        for charges in self.allocations.values():
            for z, amount in charges.items():
                expected[z] += amount
        for z, f in self.flow.items():
            if f < 0:
                raise AccountingError(f"negative flow on {z!r}")
            if f > self.net.capacity(z):
                raise CapacityViolation(f"flow on {z!r} exceeds capacity ({f} > {self.net.capacity(z)})")
            if f != expected[z]:
                raise AccountingError(f"flow on {z!r} is {f}, allocations sum to {expected[z]}")

    def digest(self) -> str:
        h = hashlib.sha256()
        for z in sorted(self.flow):
            h.update(f"{z}={self.flow[z]};".encode())
        for rid in sorted(self.allocations):
            charges = self.allocations[rid]
            h.update(f"{rid}:{sorted(charges.items())};".encode())
        return h.hexdigest()

    def copy(self) -> LoadState:
        return LoadState(
            self.net,
            dict(self.flow),
            {rid: dict(c) for rid, c in self.allocations.items()},
        )


def exp_load(state: LoadState, params: WeightParams, z: str) -> float:
    """Weight ``(2**(load*phi) - 1) / p_max`` of resource ``z``; same rule for nodes and edges."""
    load = float(state.flow[z] / state.net.capacity(z))
    return (2.0 ** (load * params.phi) - 1.0) / params.p_max


def exp_load_weights(state: LoadState, params: WeightParams) -> dict[str, float]:
    return {z: exp_load(state, params, z) for z in state.flow}


def check_small_demand(net: PhysicalNetwork, params: WeightParams, demand: Mapping[str, int] | Iterable[int]) -> bool:
    values = demand.values() if isinstance(demand, Mapping) else demand
    bound = params.demand_bound(net.min_capacity())
    return all(d <= bound for d in values)
