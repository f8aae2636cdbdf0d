"""Lightest valid realization under the current exp-load weights."""

from __future__ import annotations

import heapq
import math
from collections.abc import Mapping

from sdnadmit.errors import SdnAdmitError
from sdnadmit.net_model import LoadState, PhysicalNetwork, WeightParams, exp_load_weights
from sdnadmit.product import ProductNetwork, ProductPath, ProductRequest, Realization, build_product, fold
from sdnadmit.request_model import Request


class EnumerationLimit(SdnAdmitError):
    """Brute-force enumeration exceeded its path-count cap."""


def lightest_path(pn: ProductNetwork, preq: ProductRequest) -> tuple[float, ProductPath] | None:
    """Dijkstra from all sources at once to the nearest sink.

    Heap entries are ``(distance, vertex)`` so equal distances resolve by the
    lexicographic order of ``(node, pr_edge)``; arcs are scanned in sorted
    order and only strict improvements relax, which makes the result stable
    across runs.
    """
    dist: dict = {}
    pred: dict = {}
    heap = []
    for s in sorted(preq.sources):
        dist[s] = 0.0
        heap.append((0.0, s))
    heapq.heapify(heap)
    done = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        if v in preq.sinks:
            arcs = []
            while v in pred:
                arc = pred[v]
                arcs.append(arc)
                v = arc.tail
            return d, ProductPath(v, tuple(reversed(arcs)))
        for arc in pn.out[v]:
            u = arc.head
            if u in done:
                continue
            nd = d + pn.arc_weight(arc)
            if nd < dist.get(u, math.inf):
                dist[u] = nd
                pred[u] = arc
                heapq.heappush(heap, (nd, u))
    return None


def lightest_realization(
    net: PhysicalNetwork,
    req: Request,
    weights: Mapping[str, float],
    params: WeightParams | None = None,
) -> tuple[Realization, float] | None:
    pn, preq = build_product(net, req, weights, params)
    found = lightest_path(pn, preq)
    if found is None:
        return None
    weight, path = found
    return fold(path, req), weight


def find_realization(
    net: PhysicalNetwork,
    req: Request,
    state: LoadState,
    params: WeightParams,
) -> Realization | None:
    """Lightest realization if its exp-load weight is at most the request's benefit."""
    found = lightest_realization(net, req, exp_load_weights(state, params), params)
    if found is None or found[1] > req.benefit:
        return None
    return found[0]


def enumerate_paths(
    pn: ProductNetwork,
    preq: ProductRequest,
    bound: float = math.inf,
    cap: int = 10_000,
) -> list[tuple[ProductPath, float]]:
    """Every simple source-to-sink product path of weight at most ``bound``."""
    found: list[tuple[ProductPath, float]] = []
    if bound < 0:
        return found
    budget = [cap * 100]

    def dfs(start, v, arcs: list, on_path: set, w: float) -> None:
        budget[0] -= 1
        if budget[0] < 0:
            raise EnumerationLimit(f"search exceeded {cap * 100} steps")
        if v in preq.sinks:
            found.append((ProductPath(start, tuple(arcs)), w))
            if len(found) > cap:
                raise EnumerationLimit(f"more than {cap} realizations")
        for arc in pn.out[v]:
            u = arc.head
            if u in on_path:
                continue
            nw = w + pn.arc_weight(arc)
            if nw > bound:
                continue
            on_path.add(u)
            arcs.append(arc)
            dfs(start, u, arcs, on_path, nw)
            arcs.pop()
            on_path.discard(u)

    for s in sorted(preq.sources):
        dfs(s, s, [], {s}, 0.0)
    return found


def enumerate_realizations(
    net: PhysicalNetwork,
    req: Request,
    bound: float = math.inf,
    weights: Mapping[str, float] | None = None,
    params: WeightParams | None = None,
    cap: int = 10_000,
) -> list[Realization]:
    """Brute-force counterpart of :func:`find_realization`, meant for tests and small baselines."""
    pn, preq = build_product(net, req, weights, params)
    return [fold(path, req) for path, _ in enumerate_paths(pn, preq, bound, cap)]
