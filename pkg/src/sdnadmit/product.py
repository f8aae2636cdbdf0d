"""Product network of a physical network and a request, and the fold/expand bijection.

Product vertices are ``(node, pr_edge)`` pairs. A routing arc moves along a
physical edge inside one layer; a processing arc stays at a node and hops
from the layer of a PR-edge entering action ``x`` to the layer of one
leaving it. Simple source-to-sink paths in this graph correspond one to one
with valid realizations of the request, with equal weight.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Literal

from sdnadmit.errors import ContractViolation
from sdnadmit.net_model import PhysicalNetwork, WeightParams
from sdnadmit.request_model import Request

PVertex = tuple[str, str]
ROUTE: Literal["route"] = "route"
PROCESS: Literal["process"] = "process"


@dataclass(frozen=True, order=True)
class Arc:
    """``resource`` is the physical edge (routing) or node (processing) the arc charges;
    ``component`` is the PR-edge (routing) or PR-vertex (processing) whose demand applies."""

    tail: PVertex
    head: PVertex
    kind: str
    resource: str
    component: str


@dataclass(frozen=True)
class ProductPath:
    start: PVertex
    arcs: tuple[Arc, ...] = ()

    @property
    def vertices(self) -> list[PVertex]:
        return [self.start, *(a.head for a in self.arcs)]

    @property
    def end(self) -> PVertex:
        return self.arcs[-1].head if self.arcs else self.start

    def is_simple(self) -> bool:
        vs = self.vertices
        return len(set(vs)) == len(vs)


@dataclass(frozen=True)
class ProductRequest:
    sources: frozenset[PVertex]
    sinks: frozenset[PVertex]


class ProductNetwork:
    def __init__(self, vertices: list[PVertex], arcs: list[Arc], weights: Mapping[str, float]) -> None:
        self.vertices = vertices
        self.arcs = arcs
        self.weights = weights
        self.out: dict[PVertex, list[Arc]] = {v: [] for v in vertices}
        for arc in sorted(arcs, key=lambda a: (a.head, a.resource, a.kind)):
            self.out[arc.tail].append(arc)

    def arc_weight(self, arc: Arc) -> float:
        return self.weights.get(arc.resource, 0.0)

    def path_weight(self, path: ProductPath) -> float:
        total = 0.0
        for arc in path.arcs:
            total += self.arc_weight(arc)
        return total

    def counts(self) -> dict[str, int]:
        kinds = Counter(a.kind for a in self.arcs)
        return {"vertices": len(self.vertices), "routing_arcs": kinds[ROUTE], "processing_arcs": kinds[PROCESS]}

    def as_dict(self) -> dict:
        return {
            "vertices": [list(v) for v in self.vertices],
            "arcs": [
                {
                    "tail": list(a.tail),
                    "head": list(a.head),
                    "kind": a.kind,
                    "resource": a.resource,
                    "component": a.component,
                    "weight": self.arc_weight(a),
                }
                for a in sorted(self.arcs)
            ],
        }


def build_product(
    net: PhysicalNetwork,
    req: Request,
    weights: Mapping[str, float] | None = None,
    params: WeightParams | None = None,
) -> tuple[ProductNetwork, ProductRequest]:
    """Construct ``pn(N, r)`` and its source/sink sets.

    With ``params`` given, a resource is left out of the arcs of a component
    whenever its capacity is below ``demand * 3 * k * phi``.
    """
    g = req.graph
    scale = 3 * params.k * params.phi if params is not None else 0.0
    layers = sorted(e.id for e in g.edges)
    vertices = [(v, y) for v in sorted(net.nodes) for y in layers]
    arcs: list[Arc] = []

    for y in layers:
        need = req.edge_demand[y] * scale
        for eid in sorted(req.edges_for(y, net)):
            edge = net.edges[eid]
            if edge.u == edge.v or edge.capacity < need:
                continue
            arcs.append(Arc((edge.u, y), (edge.v, y), ROUTE, eid, y))
            arcs.append(Arc((edge.v, y), (edge.u, y), ROUTE, eid, y))

    for x in g.actions:
        need = req.vertex_demand[x] * scale
        for v in sorted(req.allowed_nodes[x]):
            if net.nodes[v] < need:
                continue
            for y_in in g.in_edges(x):
                for y_out in g.out_edges(x):
                    arcs.append(Arc((v, y_in.id), (v, y_out.id), PROCESS, v, x))

    sources = frozenset((v, e.id) for v in req.allowed_nodes[g.source] for e in g.out_edges(g.source))
    sinks = frozenset((v, e.id) for v in req.allowed_nodes[g.sink] for e in g.in_edges(g.sink))
    return ProductNetwork(vertices, arcs, weights or {}), ProductRequest(sources, sinks)


@dataclass(frozen=True)
class Realization:
    """A walk in the physical network together with its segmentation.

    ``nodes[0..n]`` and ``edges[0..n-1]`` alternate along the walk. The PR-path
    is ``pr_vertices[0] -pr_edges[0]-> pr_vertices[1] ...``; ``segmentation[i]``
    is the walk position where ``pr_vertices[i]`` is placed, so segment ``i``
    (1-based) covers walk positions ``segmentation[i-1]..segmentation[i]``.
    """

    nodes: tuple[str, ...]
    edges: tuple[str, ...]
    pr_vertices: tuple[str, ...]
    pr_edges: tuple[str, ...]
    segmentation: tuple[int, ...]

    def segment_edges(self, i: int) -> tuple[str, ...]:
        return self.edges[self.segmentation[i - 1] : self.segmentation[i]]

    def segment_nodes(self, i: int) -> tuple[str, ...]:
        return self.nodes[self.segmentation[i - 1] : self.segmentation[i] + 1]

    def placements(self) -> list[tuple[str, str]]:
        """``(action, node)`` for each interior PR-vertex."""
        return [(self.pr_vertices[i], self.nodes[self.segmentation[i]]) for i in range(1, len(self.pr_vertices) - 1)]

    def multiplicities(self) -> Counter[str]:
        m: Counter[str] = Counter(self.edges)
        m.update(node for _, node in self.placements())
        return m

    def charges(self, req: Request) -> dict[str, int]:
        """Flow this realization adds to each resource, per-component demands applied."""
        out: Counter[str] = Counter()
        for i, y in enumerate(self.pr_edges, start=1):
            for e in self.segment_edges(i):
                out[e] += req.edge_demand[y]
        for x, node in self.placements():
            out[node] += req.vertex_demand[x]
        return dict(out)

    def length(self) -> int:
        """Number of resource occurrences (edges plus action placements)."""
        return len(self.edges) + max(len(self.pr_vertices) - 2, 0)

    def as_dict(self) -> dict:
        walk: list[str] = [self.nodes[0]]
        for e, v in zip(self.edges, self.nodes[1:]):
            walk += [e, v]
        pr_path: list[str] = [self.pr_vertices[0]]
        for y, x in zip(self.pr_edges, self.pr_vertices[1:]):
            pr_path += [y, x]
        return {"walk": walk, "pr_path": pr_path, "segmentation": list(self.segmentation)}

    @classmethod
    def from_dict(cls, data: Mapping) -> Realization:
        walk, pr_path = list(data["walk"]), list(data["pr_path"])
        return cls(
            nodes=tuple(walk[0::2]),
            edges=tuple(walk[1::2]),
            pr_vertices=tuple(pr_path[0::2]),
            pr_edges=tuple(pr_path[1::2]),
            segmentation=tuple(int(i) for i in data["segmentation"]),
        )


def _is_source(v: PVertex, req: Request) -> bool:
    g = req.graph
    return v[0] in req.allowed_nodes[g.source] and g.edge(v[1]).tail == g.source


def _is_sink(v: PVertex, req: Request) -> bool:
    g = req.graph
    return v[0] in req.allowed_nodes[g.sink] and g.edge(v[1]).head == g.sink


def fold(path: ProductPath, req: Request) -> Realization:
    """Contract processing arcs to nodes and map routing arcs to physical edges."""
    if not _is_source(path.start, req) or not _is_sink(path.end, req):
        raise ContractViolation("product path must start in the source set and end in the sink set")
    if not path.is_simple():
        raise ContractViolation("product path is not simple")

    g = req.graph
    node, layer = path.start
    nodes, edges = [node], []
    pr_vertices, pr_edges, seg = [g.source], [layer], [0]
    for arc in path.arcs:
        if arc.tail != (node, layer):
            raise ContractViolation(f"arc {arc} does not continue the path")
        if arc.kind == ROUTE:
            edges.append(arc.resource)
            nodes.append(arc.head[0])
        else:
            pr_vertices.append(arc.component)
            pr_edges.append(arc.head[1])
            seg.append(len(nodes) - 1)
        node, layer = arc.head
    pr_vertices.append(g.sink)
    seg.append(len(nodes) - 1)
    return Realization(tuple(nodes), tuple(edges), tuple(pr_vertices), tuple(pr_edges), tuple(seg))


def check_realization(p: Realization, req: Request, net: PhysicalNetwork) -> None:
    """Raise ``ContractViolation`` unless ``p`` is a valid realization of ``req`` in ``net``."""
    g = req.graph
    if not p.nodes or len(p.nodes) != len(p.edges) + 1:
        raise ContractViolation("walk must alternate nodes and edges, starting and ending at a node")
    if len(p.pr_vertices) != len(p.pr_edges) + 1 or len(p.segmentation) != len(p.pr_vertices):
        raise ContractViolation("PR-path and segmentation lengths disagree")
    if p.pr_vertices[0] != g.source or p.pr_vertices[-1] != g.sink:
        raise ContractViolation("PR-path must run from source to sink")
    for i, y in enumerate(p.pr_edges):
        try:
            pe = g.edge(y)
        except KeyError:
            raise ContractViolation(f"unknown PR-edge {y!r}") from None
        if (pe.tail, pe.head) != (p.pr_vertices[i], p.pr_vertices[i + 1]):
            raise ContractViolation(f"PR-edge {y!r} does not join {p.pr_vertices[i]!r} and {p.pr_vertices[i + 1]!r}")
    if len(set(p.pr_vertices)) != len(p.pr_vertices):
        raise ContractViolation("PR-path is not simple")

    f = p.segmentation
    if f[0] != 0 or f[-1] != len(p.nodes) - 1 or any(a > b for a, b in zip(f, f[1:])):
        raise ContractViolation("segmentation must be nondecreasing from the first to the last walk position")
    for j, eid in enumerate(p.edges):
        edge = net.edges.get(eid)
        if edge is None or {edge.u, edge.v} != {p.nodes[j], p.nodes[j + 1]}:
            raise ContractViolation(f"edge {eid!r} does not join {p.nodes[j]!r} and {p.nodes[j + 1]!r}")
    for i, y in enumerate(p.pr_edges, start=1):
        allowed = req.edges_for(y, net)
        if not set(p.segment_edges(i)) <= allowed:
            raise ContractViolation(f"segment {i} uses edges outside U({y})")
        seg_nodes = p.segment_nodes(i)
        if len(set(seg_nodes)) != len(seg_nodes):
            raise ContractViolation(f"segment {i} is not a simple path")
    for i, x in enumerate(p.pr_vertices):
        if p.nodes[f[i]] not in req.allowed_nodes[x]:
            raise ContractViolation(f"{x!r} placed at {p.nodes[f[i]]!r}, outside U({x})")


def expand(p: Realization, req: Request, net: PhysicalNetwork) -> ProductPath:
    """Inverse of :func:`fold`."""
    check_realization(p, req, net)
    arcs: list[Arc] = []
    layers = p.pr_edges
    for i, y in enumerate(layers, start=1):
        lo = p.segmentation[i - 1]
        for j, eid in enumerate(p.segment_edges(i)):
            arcs.append(Arc((p.nodes[lo + j], y), (p.nodes[lo + j + 1], y), ROUTE, eid, y))
        if i < len(layers):
            v = p.nodes[p.segmentation[i]]
            arcs.append(Arc((v, y), (v, layers[i]), PROCESS, v, p.pr_vertices[i]))
    return ProductPath((p.nodes[0], layers[0]), tuple(arcs))


def realization_weight(p: Realization, weights: Mapping[str, float]) -> float:
    """Sum of resource weights times multiplicity, accumulated in walk order."""
    total = 0.0
    last = len(p.pr_edges)
    for i in range(1, last + 1):
        for e in p.segment_edges(i):
            total += weights.get(e, 0.0)
        if i < last:
            total += weights.get(p.nodes[p.segmentation[i]], 0.0)
    return total
