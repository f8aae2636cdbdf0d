"""PR-graphs and requests.

A PR-graph is a DAG with a single source and a single sink; every other
vertex is an action. A request pairs a PR-graph with per-component demands,
a per-step benefit and the placement map ``U`` that says which physical
nodes may host each PR-vertex and which physical edges may carry each
PR-edge.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

from sdnadmit.errors import ValidationError
from sdnadmit.net_model import PhysicalNetwork, WeightParams, check_small_demand


@dataclass(frozen=True)
class PrEdge:
    id: str
    tail: str
    head: str


@dataclass(frozen=True)
class PrGraph:
    vertices: tuple[str, ...]
    edges: tuple[PrEdge, ...]
    source: str
    sink: str

    def __post_init__(self) -> None:
        if len(set(self.vertices)) != len(self.vertices):
            raise ValidationError("duplicate-id", "repeated PR-vertex id")
        if len({e.id for e in self.edges}) != len(self.edges):
            raise ValidationError("duplicate-id", "repeated PR-edge id")
        known = set(self.vertices)
        for e in self.edges:
            if e.tail not in known or e.head not in known:
                raise ValidationError("unknown-vertex", f"PR-edge {e.id!r} has an unknown endpoint")
        for x in (self.source, self.sink):
            if x not in known:
                raise ValidationError("unknown-vertex", f"{x!r} is not a PR-vertex")

    @cached_property
    def _by_id(self) -> dict[str, PrEdge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def _out(self) -> dict[str, list[PrEdge]]:
        out: dict[str, list[PrEdge]] = {x: [] for x in self.vertices}
        for e in sorted(self.edges, key=lambda e: e.id):
            out[e.tail].append(e)
        return out

    @cached_property
    def _in(self) -> dict[str, list[PrEdge]]:
        inc: dict[str, list[PrEdge]] = {x: [] for x in self.vertices}
        for e in sorted(self.edges, key=lambda e: e.id):
            inc[e.head].append(e)
        return inc

    def edge(self, edge_id: str) -> PrEdge:
        return self._by_id[edge_id]

    def out_edges(self, x: str) -> list[PrEdge]:
        return self._out[x]

    def in_edges(self, x: str) -> list[PrEdge]:
        return self._in[x]

    @property
    def actions(self) -> list[str]:
        return [x for x in self.vertices if x not in (self.source, self.sink)]

    def topological_order(self) -> list[str]:
        """Kahn's algorithm; raises ``ValidationError('cyclic')`` on a cycle."""
        indeg = {x: len(self._in[x]) for x in self.vertices}
        ready = sorted(x for x, d in indeg.items() if d == 0)
        order = []
        while ready:
            x = ready.pop(0)
            order.append(x)
            for e in self._out[x]:
                indeg[e.head] -= 1
                if indeg[e.head] == 0:
                    ready.append(e.head)
            ready.sort()
        if len(order) != len(self.vertices):
            raise ValidationError("cyclic", "PR-graph contains a directed cycle")
        return order

    def longest_path_length(self) -> int:
        """Number of edges on a longest source-sink path (DAG only)."""
        best: dict[str, int] = {}
        for x in reversed(self.topological_order()):
            if x == self.sink:
                best[x] = 0
                continue
            tails = [best[e.head] + 1 for e in self._out[x] if e.head in best]
            if tails:
                best[x] = max(tails)
        return best.get(self.source, 0)

    def st_paths(self) -> list[tuple[PrEdge, ...]]:
        """All source-sink paths as edge tuples (DAG, so all simple)."""
        paths: list[tuple[PrEdge, ...]] = []

        def walk(x: str, acc: list[PrEdge]) -> None:
            if x == self.sink:
                paths.append(tuple(acc))
                return
            for e in self._out[x]:
                acc.append(e)
                walk(e.head, acc)
                acc.pop()

        walk(self.source, [])
        return paths

    def useful_vertices(self) -> set[str]:
        """Vertices lying on at least one source-sink path."""
        fwd = _reach(self.source, lambda x: [e.head for e in self._out[x]])
        back = _reach(self.sink, lambda x: [e.tail for e in self._in[x]])
        return fwd & back


def _reach(start: str, step) -> set[str]:
    seen = {start}
    stack = [start]
    while stack:
        for y in step(stack.pop()):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


@dataclass(frozen=True)
class Request:
    """One request. Treat as immutable once validated.

    ``allowed_edges[y] is None`` means PR-edge ``y`` may use every physical edge.
    """

    id: str
    graph: PrGraph
    vertex_demand: Mapping[str, int]
    edge_demand: Mapping[str, int]
    benefit: int
    allowed_nodes: Mapping[str, frozenset[str]]
    allowed_edges: Mapping[str, frozenset[str] | None] = field(default_factory=dict)

    def demand_of(self, component: str, *, is_edge: bool) -> int:
        return self.edge_demand[component] if is_edge else self.vertex_demand[component]

    def demands(self) -> list[int]:
        return [*self.vertex_demand.values(), *self.edge_demand.values()]

    def edges_for(self, y: str, net: PhysicalNetwork) -> frozenset[str]:
        allowed = self.allowed_edges.get(y)
        return frozenset(net.edges) if allowed is None else allowed

    def total_demand(self) -> int:
        return sum(self.demands())


def _positive_int(value: object) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 1


def validate(
    req: Request,
    net: PhysicalNetwork,
    params: WeightParams,
    *,
    check_demand: bool = True,
) -> None:
    """Raise ``ValidationError`` unless ``req`` is well formed for ``net`` under ``params``.

    ``check_demand=False`` skips only the small-demand precondition, which
    lets a harness downgrade that single check to a warning.
    """
    g = req.graph
    g.topological_order()

    in0 = [x for x in g.vertices if not g.in_edges(x)]
    out0 = [x for x in g.vertices if not g.out_edges(x)]
    if len(in0) > 1:
        raise ValidationError("multiple-sources", f"vertices with in-degree 0: {sorted(in0)}")
    if len(out0) > 1:
        raise ValidationError("multiple-sinks", f"vertices with out-degree 0: {sorted(out0)}")
    if in0 != [g.source]:
        raise ValidationError("bad-source", f"declared source {g.source!r} has incoming edges")
    if out0 != [g.sink]:
        raise ValidationError("bad-sink", f"declared sink {g.sink!r} has outgoing edges")
    if g.source == g.sink:
        raise ValidationError("bad-source", "source and sink coincide")

    dangling = set(g.vertices) - g.useful_vertices()
    if dangling:
        raise ValidationError("dangling", f"vertices off every source-sink path: {sorted(dangling)}")

    if set(req.vertex_demand) != set(g.vertices) or set(req.edge_demand) != {e.id for e in g.edges}:
        raise ValidationError("missing-demand", "demand must be defined on exactly the PR-graph components")
    for comp, d in [*req.vertex_demand.items(), *req.edge_demand.items()]:
        if not _positive_int(d):
            raise ValidationError("bad-demand", f"demand of {comp!r} must be a positive integer, got {d!r}")

    if not _positive_int(req.benefit):
        raise ValidationError("bad-benefit", f"benefit must be a positive integer, got {req.benefit!r}")
    if req.benefit > params.b_max:
        raise ValidationError("benefit-exceeds-bmax", f"benefit {req.benefit} > b_max {params.b_max}")

    if set(req.allowed_nodes) != set(g.vertices):
        raise ValidationError("missing-placement", "allowed_nodes must cover every PR-vertex")
    for x, nodes in req.allowed_nodes.items():
        if not nodes:
            raise ValidationError("empty-placement", f"U({x}) is empty")
        unknown = set(nodes) - set(net.nodes)
        if unknown:
            raise ValidationError("unknown-resource", f"U({x}) names unknown nodes {sorted(unknown)}")
    edge_ids = {e.id for e in g.edges}
    for y, allowed in req.allowed_edges.items():
        if y not in edge_ids:
            raise ValidationError("missing-placement", f"allowed_edges names unknown PR-edge {y!r}")
        if allowed is None:
            continue
        if not allowed:
            raise ValidationError("empty-placement", f"U({y}) is empty")
        unknown = set(allowed) - set(net.edges)
        if unknown:
            raise ValidationError("unknown-resource", f"U({y}) names unknown edges {sorted(unknown)}")

    length = g.longest_path_length()
    if length > params.k:
        raise ValidationError("path-too-long", f"longest PR-path has {length} edges, k={params.k}")

    if check_demand and not check_small_demand(net, params, req.demands()):
        bound = params.demand_bound(net.min_capacity())
        raise ValidationError("demand-too-large", f"max demand {max(req.demands())} > {bound:.6g}")


def _node_set(nodes: str | Iterable[str]) -> frozenset[str]:
    return frozenset([nodes]) if isinstance(nodes, str) else frozenset(nodes)


def simple_routing(
    request_id: str,
    src: str | Iterable[str],
    dst: str | Iterable[str],
    demand: int,
    benefit: int,
    allowed_edges: Iterable[str] | None = None,
) -> Request:
    """Single PR-edge ``s -> t`` request."""
    graph = PrGraph(("s", "t"), (PrEdge("e1", "s", "t"),), "s", "t")
    return Request(
        id=request_id,
        graph=graph,
        vertex_demand={"s": demand, "t": demand},
        edge_demand={"e1": demand},
        benefit=benefit,
        allowed_nodes={"s": _node_set(src), "t": _node_set(dst)},
        allowed_edges={"e1": None if allowed_edges is None else frozenset(allowed_edges)},
    )


def serial_chain(
    actions: Sequence[Iterable[str]],
    demands: Sequence[int],
    benefit: int,
    *,
    source: str | Iterable[str],
    sink: str | Iterable[str],
    request_id: str = "r",
    action_demands: Sequence[int] | None = None,
    allowed_edges: Mapping[str, Iterable[str]] | None = None,
) -> Request:
    """Path-shaped request ``s -> a1 -> ... -> an -> t``.

    ``demands`` holds one bandwidth per PR-edge (``len(actions) + 1`` values).
    ``action_demands`` defaults to the demand of the edge entering each action.
    """
    if not actions:
        raise ValidationError("bad-chain", "serial chain needs at least one action")
    n = len(actions)
    if len(demands) != n + 1:
        raise ValidationError("length-mismatch", f"{n} actions need {n + 1} edge demands, got {len(demands)}")
    if action_demands is None:
        action_demands = list(demands[:n])
    elif len(action_demands) != n:
        raise ValidationError("length-mismatch", f"{n} actions need {n} action demands")

    names = ["s", *(f"a{i}" for i in range(1, n + 1)), "t"]
    edges = tuple(PrEdge(f"e{i}", names[i - 1], names[i]) for i in range(1, n + 2))
    vertex_demand = {"s": demands[0], "t": demands[-1]}
    vertex_demand.update({f"a{i}": action_demands[i - 1] for i in range(1, n + 1)})
    allowed_nodes = {"s": _node_set(source), "t": _node_set(sink)}
    allowed_nodes.update({f"a{i}": _node_set(actions[i - 1]) for i in range(1, n + 1)})
    overrides = allowed_edges or {}
    return Request(
        id=request_id,
        graph=PrGraph(tuple(names), edges, "s", "t"),
        vertex_demand=vertex_demand,
        edge_demand={e.id: demands[i] for i, e in enumerate(edges)},
        benefit=benefit,
        allowed_nodes=allowed_nodes,
        allowed_edges={e.id: (frozenset(overrides[e.id]) if e.id in overrides else None) for e in edges},
    )


# -- star-free regular expressions -------------------------------------------------

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokenize(expr: str) -> list[str]:
    tokens = []
    for m in _TOKEN.finditer(expr):
        sym, op = m.groups()
        if sym is not None:
            tokens.append(sym)
        elif op is not None and not op.isspace():
            if op in "*+?":
                raise ValidationError("unsupported-expression", f"operator {op!r} is not star-free")
            if op not in "|()·.":
                raise ValidationError("bad-expression", f"unexpected character {op!r}")
            tokens.append(op)
    return tokens


class _Glushkov:
    """Recursive-descent parser computing first/last/follow sets over symbol positions."""

    def __init__(self, tokens: list[str]) -> None:
        self.tokens = tokens
        self.i = 0
        self.symbols: list[str] = []
        self.follow: dict[int, set[int]] = {}

    def peek(self) -> str | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def parse(self) -> tuple[set[int], set[int]]:
        if not self.tokens:
            raise ValidationError("bad-expression", "empty expression")
        first, last = self.alternation()
        if self.peek() is not None:
            raise ValidationError("bad-expression", f"unexpected token {self.peek()!r}")
        return first, last

    def alternation(self) -> tuple[set[int], set[int]]:
        first, last = self.concatenation()
        while self.peek() == "|":
            self.i += 1
            f2, l2 = self.concatenation()
            first, last = first | f2, last | l2
        return first, last

    def concatenation(self) -> tuple[set[int], set[int]]:
        first, last = self.atom()
        while True:
            tok = self.peek()
            if tok in ("·", "."):
                self.i += 1
            elif tok is None or tok in ("|", ")"):
                return first, last
            f2, l2 = self.atom()
            for p in last:
                self.follow[p] |= f2
            last = l2

    def atom(self) -> tuple[set[int], set[int]]:
        tok = self.peek()
        if tok == "(":
            self.i += 1
            result = self.alternation()
            if self.peek() != ")":
                raise ValidationError("bad-expression", "unbalanced parenthesis")
            self.i += 1
            return result
        if tok is None or tok in "|)·.":
            raise ValidationError("bad-expression", f"expected a symbol, got {tok!r}")
        self.i += 1
        pos = len(self.symbols)
        self.symbols.append(tok)
        self.follow[pos] = set()
        return {pos}, {pos}


def from_regex(
    expr: str,
    actions: Mapping[str, Iterable[str]],
    demand: int,
    benefit: int,
    *,
    source: str | Iterable[str],
    sink: str | Iterable[str],
    request_id: str = "r",
) -> Request:
    """Request whose source-sink paths spell exactly the words of a star-free expression.

    Alternation is ``|``; concatenation is ``·``, ``.`` or juxtaposition.
    Each symbol occurrence becomes one action vertex (position automaton),
    so no epsilon transitions ever arise.
    """
    parser = _Glushkov(_tokenize(expr))
    first, last = parser.parse()
    missing = sorted(set(parser.symbols) - set(actions))
    if missing:
        raise ValidationError("unknown-action", f"no placement given for {missing}")

    names = [f"x{p + 1}_{sym}" for p, sym in enumerate(parser.symbols)]
    arcs = [("s", names[p]) for p in sorted(first)]
    for p in range(len(names)):
        arcs.extend((names[p], names[q]) for q in sorted(parser.follow[p]))
    arcs.extend((names[p], "t") for p in sorted(last))
    edges = tuple(PrEdge(f"{a}->{b}", a, b) for a, b in arcs)
    graph = PrGraph(("s", *names, "t"), edges, "s", "t")

    keep = graph.useful_vertices()
    if keep != set(graph.vertices):
        graph = PrGraph(
            tuple(x for x in graph.vertices if x in keep),
            tuple(e for e in edges if e.tail in keep and e.head in keep),
            "s",
            "t",
        )

    allowed_nodes = {"s": _node_set(source), "t": _node_set(sink)}
    for p, sym in enumerate(parser.symbols):
        if names[p] in keep:
            allowed_nodes[names[p]] = _node_set(actions[sym])
    return Request(
        id=request_id,
        graph=graph,
        vertex_demand={x: demand for x in graph.vertices},
        edge_demand={e.id: demand for e in graph.edges},
        benefit=benefit,
        allowed_nodes=allowed_nodes,
        allowed_edges={e.id: None for e in graph.edges},
    )


def action_label(vertex_id: str) -> str:
    """Symbol an action vertex built by ``from_regex`` stands for."""
    return vertex_id.split("_", 1)[1]
