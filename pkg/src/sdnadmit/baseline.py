"""Offline baselines for a single time step, and the nested-interval adversary.

``opt_fractional`` is the splittable, partial-service optimum over the set
of requests active at one step. ``opt_integral_bruteforce`` is the
all-or-nothing single-realization optimum, found by branch and bound on
tiny instances. Both ignore history: each step is solved from scratch.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from sdnadmit.errors import SdnAdmitError
from sdnadmit.formats import Event
from sdnadmit.net_model import PhysicalNetwork, WeightParams
from sdnadmit.oracle import EnumerationLimit, enumerate_realizations
from sdnadmit.product import PROCESS, build_product
from sdnadmit.request_model import Request, simple_routing


class SolverError(SdnAdmitError):
    """The LP solver did not reach an optimum."""


class _LP:
    """Sparse LP builder: ``max c.x`` s.t. ``A_ub x <= b_ub``, ``A_eq x = 0``, ``x >= 0``."""

    def __init__(self) -> None:
        self.n = 0
        self.obj: list[float] = []
        self.ub_rows: dict = {}
        self.ub_rhs: dict = {}
        self.eq_rows: dict = {}
        self.ub_entries: list[tuple[object, int, float]] = []
        self.eq_entries: list[tuple[object, int, float]] = []

    def var(self, gain: float = 0.0) -> int:
        self.obj.append(gain)
        self.n += 1
        return self.n - 1

    def ub(self, row, col: int, coef: float, rhs: float) -> None:
        self.ub_rows.setdefault(row, len(self.ub_rows))
        self.ub_rhs[row] = rhs
        self.ub_entries.append((row, col, coef))

    def eq(self, row, col: int, coef: float) -> None:
        self.eq_rows.setdefault(row, len(self.eq_rows))
        self.eq_entries.append((row, col, coef))

    @staticmethod
    def _matrix(entries, rows: dict, n: int):
        if not entries:
            return None
        r = [rows[row] for row, _, _ in entries]
        c = [col for _, col, _ in entries]
        v = [coef for _, _, coef in entries]
        return coo_matrix((v, (r, c)), shape=(len(rows), n)).tocsr()

    def solve(self) -> float:
        if self.n == 0:
            return 0.0
        a_ub = self._matrix(self.ub_entries, self.ub_rows, self.n)
        b_ub = np.array([self.ub_rhs[row] for row in self.ub_rows]) if a_ub is not None else None
        a_eq = self._matrix(self.eq_entries, self.eq_rows, self.n)
        b_eq = np.zeros(len(self.eq_rows)) if a_eq is not None else None
        res = linprog(
            -np.asarray(self.obj),
            A_ub=a_ub,
            b_ub=b_ub,
            A_eq=a_eq,
            b_eq=b_eq,
            bounds=(0, None),
            method="highs",
        )
        if res.status != 0:
            raise SolverError(f"linprog failed: {res.message}")
        return float(-res.fun)


def _useful_arcs(pn, preq):
    """Arcs on some source-to-sink walk; the rest cannot carry flow."""
    fwd = set(preq.sources)
    stack = list(fwd)
    while stack:
        for a in pn.out[stack.pop()]:
            if a.head not in fwd:
                fwd.add(a.head)
                stack.append(a.head)
    back_adj: dict = {}
    for a in pn.arcs:
        back_adj.setdefault(a.head, []).append(a.tail)
    back = set(preq.sinks)
    stack = list(back)
    while stack:
        for u in back_adj.get(stack.pop(), ()):
            if u not in back:
                back.add(u)
                stack.append(u)
    return [a for a in pn.arcs if a.tail in fwd and a.head in back], fwd & back


def opt_fractional(net: PhysicalNetwork, requests: Iterable[Request], method: str = "arc") -> float:
    """Fractional per-step optimum.

    ``method="arc"`` uses arc-flow variables on each request's product
    network; ``method="path"`` uses one variable per enumerated realization
    and is only suitable when realizations are few.
    """
    if method == "path":
        return _opt_fractional_paths(net, list(requests))
    if method != "arc":
        raise ValueError(f"unknown method {method!r}")
    lp = _LP()
    for j, req in enumerate(requests):
        pn, preq = build_product(net, req)
        arcs, keep = _useful_arcs(pn, preq)
        if not keep:
            continue
        for s in sorted(preq.sources & keep):
            col = lp.var(float(req.benefit))
            lp.eq((j, s), col, 1.0)
            lp.ub(("serve", j), col, 1.0, 1.0)
        for t in sorted(preq.sinks & keep):
            col = lp.var()
            lp.eq((j, t), col, -1.0)
        for a in arcs:
            col = lp.var()
            lp.eq((j, a.tail), col, -1.0)
            lp.eq((j, a.head), col, 1.0)
            d = req.vertex_demand[a.component] if a.kind == PROCESS else req.edge_demand[a.component]
            lp.ub(("cap", a.resource), col, float(d), float(net.capacity(a.resource)))
    return lp.solve()


def _opt_fractional_paths(net: PhysicalNetwork, requests: list[Request]) -> float:
    lp = _LP()
    for j, req in enumerate(requests):
        for p in enumerate_realizations(net, req):
            col = lp.var(float(req.benefit))
            lp.ub(("serve", j), col, 1.0, 1.0)
            for z, amount in p.charges(req).items():
                lp.ub(("cap", z), col, float(amount), float(net.capacity(z)))
    return lp.solve()


def _options(net: PhysicalNetwork, req: Request, cap: int) -> list[dict[str, int]]:
    """Distinct, individually feasible, non-dominated charge vectors of ``req``."""
    seen: set[tuple] = set()
    charges = []
    for p in enumerate_realizations(net, req, cap=cap):
        c = p.charges(req)
        key = tuple(sorted(c.items()))
        if key in seen or any(amount > net.capacity(z) for z, amount in c.items()):
            continue
        seen.add(key)
        charges.append(c)
    charges.sort(key=lambda c: (sum(c.values()), sorted(c.items())))
    kept: list[dict[str, int]] = []
    for c in charges:
        if not any(all(c.get(z, 0) >= amount for z, amount in k.items()) for k in kept):
            kept.append(c)
    return kept


def opt_integral_bruteforce(
    net: PhysicalNetwork,
    requests: Iterable[Request],
    cap: int = 10_000,
    max_nodes: int = 2_000_000,
) -> int:
    """Best total benefit of an all-or-nothing, single-realization, capacity-feasible selection."""
    reqs = [r for r in requests]
    opts = [(r.benefit, _options(net, r, cap)) for r in reqs]
    opts = sorted((o for o in opts if o[1]), key=lambda o: -o[0])
    suffix = [0] * (len(opts) + 1)
    for i in range(len(opts) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + opts[i][0]
    used: dict[str, int] = {}
    best = 0
    budget = [max_nodes]

    def dfs(i: int, value: int) -> None:
        nonlocal best
        budget[0] -= 1
        if budget[0] < 0:
            raise EnumerationLimit(f"branch and bound exceeded {max_nodes} nodes")
        if value + suffix[i] <= best:
            return
        if i == len(opts):
            best = value
            return
        benefit, choices = opts[i]
        for c in choices:
            if all(used.get(z, 0) + amount <= net.capacity(z) for z, amount in c.items()):
                for z, amount in c.items():
                    used[z] = used.get(z, 0) + amount
                dfs(i + 1, value + benefit)
                for z, amount in c.items():
                    used[z] -= amount
        dfs(i + 1, value)

    dfs(0, 0)
    return best


# -- lower-bound family ------------------------------------------------------------


def lower_bound_family_params(n: int, b_max: int = 1) -> WeightParams:
    return WeightParams(p_max=n, b_max=b_max, k=1)


def gen_lower_bound_trace(n: int, b_max: int = 1, quiet: int = 10) -> tuple[PhysicalNetwork, list[Event], dict]:
    """Nested-interval adversary on a path of ``n`` nodes.

    Level ``i`` splits the path into ``2**i`` aligned blocks of ``n / 2**i``
    nodes, for ``i = 0 .. log2(n) - 1``; each block receives as many
    unit-demand routing requests between its end nodes as one link can hold.
    Coarse levels arrive first, one request per time unit. Benefits double
    per level up to ``b_max`` at the finest level. After ``quiet`` idle steps
    every request departs at once.
    """
    if n < 2 or n & (n - 1):
        raise ValueError(f"n must be a power of two >= 2, got {n}")
    if quiet < 0:
        raise ValueError("quiet period must be nonnegative")
    params = lower_bound_family_params(n, b_max)
    capacity = math.ceil(3 * params.k * params.phi)
    nodes = [(f"v{i}", capacity) for i in range(n)]
    links = [(f"l{i}", f"v{i}", f"v{i + 1}", capacity) for i in range(n - 1)]
    net = PhysicalNetwork.from_lists(nodes, links)

    levels = n.bit_length() - 1
    events: list[Event] = []
    t = 0
    for level in range(levels):
        size = n >> level
        benefit = max(1, b_max >> (levels - 1 - level))
        for block in range(1 << level):
            lo, hi = block * size, (block + 1) * size - 1
            for copy in range(capacity):
                req = simple_routing(f"L{level}B{block}C{copy}", f"v{lo}", f"v{hi}", 1, benefit)
                events.append(Event.arrival(t, req))
                t += 1
    leave = t - 1 + quiet + 1
    for ev in list(events):
        events.append(Event.departure(leave, ev.request_id))
    return net, events, {"k": 1, "b_max": b_max, "p_max": n}


def measure_lower_bound(n: int, b_max: int = 1, retry_order: str = "fifo") -> dict:
    """ALG versus the fractional optimum during the quiet period of the family.

    Nothing changes during the quiet period, so this per-step ratio is also
    the limit of the whole-trace ratio as the quiet period grows.
    """
    from sdnadmit.scheduler import Scheduler

    net, events, p = gen_lower_bound_trace(n, b_max, quiet=0)
    params = WeightParams(p["p_max"], p["b_max"], p["k"])
    sched = Scheduler(net, params, retry_order=retry_order)
    arrivals = [ev.request for ev in events if ev.kind == "arrival"]
    for ev in events:
        if ev.kind == "arrival":
            sched.on_arrival(ev.request, ev.t)
    alg = sched.current_benefit()
    opt = opt_fractional(net, arrivals, method="path")
    return {
        "n": n,
        "b_max": b_max,
        "phi": params.phi,
        "requests": len(arrivals),
        "accepted": len(sched.active),
        "alg_benefit": alg,
        "opt_fractional": opt,
        "ratio": alg / opt if opt else math.nan,
    }


def lower_bound_curve(sizes: Sequence[int], b_max: int = 1) -> list[dict]:
    return [measure_lower_bound(n, b_max) for n in sizes]
