"""Trace replay, metrics and random instance generation."""

from __future__ import annotations

import csv
import io
import logging
import math
import random
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from sdnadmit import formats
from sdnadmit.baseline import opt_fractional, opt_integral_bruteforce
from sdnadmit.errors import ValidationError
from sdnadmit.formats import Event
from sdnadmit.net_model import Edge, LoadState, PhysicalNetwork, WeightParams, exp_load_weights
from sdnadmit.oracle import EnumerationLimit
from sdnadmit.product import build_product
from sdnadmit.request_model import Request, from_regex, serial_chain, simple_routing, validate
from sdnadmit.scheduler import Scheduler

log = logging.getLogger(__name__)


def resolve_params(
    net: PhysicalNetwork,
    events: Iterable[Event],
    k: int | None = None,
    b_max: int | None = None,
    p_max: int | None = None,
    trace_params: Mapping | None = None,
) -> WeightParams:
    """Explicit overrides win, then the trace header, then the largest values in the trace."""
    trace_params = trace_params or {}
    reqs = [ev.request for ev in events if ev.kind == "arrival"]
    if k is None:
        k = trace_params.get("k") or max((r.graph.longest_path_length() for r in reqs), default=1)
    if b_max is None:
        b_max = trace_params.get("b_max") or max((r.benefit for r in reqs), default=1)
    if p_max is None:
        p_max = trace_params.get("p_max")
    return WeightParams.for_network(net, max(k, 1), max(b_max, 1), p_max)


def validate_trace(
    net: PhysicalNetwork,
    events: Iterable[Event],
    params: WeightParams,
    on_precondition: str = "reject",
) -> list[str]:
    """Validate every arriving request; returns warnings issued in ``warn`` mode."""
    if on_precondition not in ("reject", "warn"):
        raise ValueError(f"on_precondition must be 'reject' or 'warn', got {on_precondition!r}")
    formats.check_trace(events)
    warnings = []
    for ev in events:
        if ev.kind != "arrival":
            continue
        validate(ev.request, net, params, check_demand=False)
        try:
            validate(ev.request, net, params)
        except ValidationError as exc:
            if on_precondition == "reject":
                raise
            warnings.append(f"request {ev.request_id}: {exc}")
            log.warning("request %s violates the small-demand condition: %s", ev.request_id, exc)
    return warnings


@dataclass
class RunResult:
    scheduler: Scheduler
    steps: list[int]
    alg: list[int]
    opt: list[float] | None = None
    opt_integral: list[int | None] | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def total_benefit(self) -> int:
        return sum(self.alg)

    @property
    def ratio(self) -> float | None:
        """Empirical competitive ratio over the run; ``None`` when undefined."""
        if self.opt is None:
            return None
        total = sum(self.opt)
        return self.total_benefit / total if total > 1e-12 else None

    def metrics(self) -> dict:
        s = self.scheduler
        return {
            "events": sum(1 for e in s.log if e["event"] == "arrival" or e["decision"] == "depart"),
            "steps": len(self.steps),
            "total_benefit": self.total_benefit,
            "accepted": sum(1 for e in s.log if e["decision"] == "accept"),
            "standby_responses": sum(1 for e in s.log if e["decision"] == "standby"),
            "opt_fractional_total": sum(self.opt) if self.opt is not None else None,
            "ratio": self.ratio,
            "params": {"k": s.params.k, "b_max": s.params.b_max, "p_max": s.params.p_max, "phi": s.params.phi},
        }

    def benefit_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "alg_benefit"])
        w.writerows(zip(self.steps, self.alg))
        return buf.getvalue()

    def baseline_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "alg_benefit", "opt_fractional", "opt_integral", "ratio"])
        integral = self.opt_integral or [None] * len(self.steps)
        for t, a, o, oi in zip(self.steps, self.alg, self.opt or [], integral):
            ratio = f"{a / o:.9g}" if o > 1e-12 else "n/a"
            w.writerow([t, a, f"{o:.9g}", "" if oi is None else oi, ratio])
        return buf.getvalue()


def simulate(
    net: PhysicalNetwork,
    events: Sequence[Event],
    params: WeightParams,
    *,
    retry_order: str = "fifo",
    check_invariants: bool = True,
    baseline: bool = False,
    integral: bool = False,
    on_step: Callable[[int, Scheduler], None] | None = None,
    on_arrival: Callable[[Request, LoadState], None] | None = None,
) -> RunResult:
    """Replay ``events`` through a fresh scheduler.

    Step ``t`` is scored after every event stamped ``t`` has been processed.
    The served set only changes at events, so baselines are solved once per
    event timestamp and carried over idle steps.
    """
    sched = Scheduler(net, params, retry_order=retry_order, check_invariants=check_invariants)
    if not events:
        return RunResult(sched, [], [], [] if baseline else None, [] if integral else None)

    by_time: dict[int, list[Event]] = {}
    for ev in events:
        by_time.setdefault(ev.t, []).append(ev)
    first, last = events[0].t, events[-1].t

    steps, alg = [], []
    opt: list[float] | None = [] if baseline else None
    opt_int: list[int | None] | None = [] if integral else None
    cur_opt, cur_int = 0.0, 0
    for t in range(first, last + 1):
        batch = by_time.get(t)
        if batch:
            for ev in batch:
                if ev.kind == "arrival":
                    if on_arrival is not None:
                        on_arrival(ev.request, sched.state)
                    sched.on_arrival(ev.request, t)
                else:
                    sched.on_departure(ev.request_id, t)
            active = sched.active_requests()
            if baseline:
                cur_opt = opt_fractional(net, active)
            if integral:
                try:
                    cur_int = opt_integral_bruteforce(net, active)
                except EnumerationLimit:
                    cur_int = None
        steps.append(t)
        alg.append(sched.current_benefit())
        if opt is not None:
            opt.append(cur_opt)
        if opt_int is not None:
            opt_int.append(cur_int)
        if on_step is not None:
            on_step(t, sched)
    return RunResult(sched, steps, alg, opt, opt_int)


@dataclass
class RunConfig:
    network: Path
    trace: Path
    k: int | None = None
    b_max: int | None = None
    p_max: int | None = None
    retry_order: str = "fifo"
    baseline: bool = False
    integral: bool = False
    on_precondition: str = "reject"
    out: Path | None = None
    dump_product: bool = False


def run(config: RunConfig) -> RunResult:
    net = formats.load_network(config.network)
    events, trace_params = formats.load_trace(config.trace)
    params = resolve_params(net, events, config.k, config.b_max, config.p_max, trace_params)
    warnings = validate_trace(net, events, params, config.on_precondition)

    dump_dir = None
    if config.out is not None:
        config.out.mkdir(parents=True, exist_ok=True)
        if config.dump_product:
            dump_dir = config.out / "product"
            dump_dir.mkdir(exist_ok=True)

    def dump(req: Request, state: LoadState) -> None:
        pn, preq = build_product(net, req, exp_load_weights(state, params), params)
        body = pn.as_dict()
        body["sources"] = sorted(list(v) for v in preq.sources)
        body["sinks"] = sorted(list(v) for v in preq.sinks)
        formats.write_json(dump_dir / f"{req.id}.json", body)

    result = simulate(
        net,
        events,
        params,
        retry_order=config.retry_order,
        baseline=config.baseline,
        integral=config.integral,
        on_arrival=dump if dump_dir is not None else None,
    )
    result.warnings = warnings

    if config.out is not None:
        (config.out / "decisions.jsonl").write_text(formats.decision_log_lines(result.scheduler.log), encoding="utf-8")
        (config.out / "benefit.csv").write_text(result.benefit_csv(), encoding="utf-8")
        if config.baseline:
            (config.out / "baseline.csv").write_text(result.baseline_csv(), encoding="utf-8")
        formats.write_json(config.out / "metrics.json", result.metrics())
    return result


def benefit_series_from_log(log_entries: Iterable[Mapping], benefits: Mapping[str, int], steps: Sequence[int]) -> list[int]:
    """Rebuild the per-step benefit from a decision log."""
    delta: dict[int, int] = {}
    served: set[str] = set()
    for e in log_entries:
        rid, t = e["request"], e["t"]
        if e["decision"] == "accept":
            served.add(rid)
            delta[t] = delta.get(t, 0) + benefits[rid]
        elif e["decision"] == "depart" and rid in served:
            served.discard(rid)
            delta[t] = delta.get(t, 0) - benefits[rid]
    out, running = [], 0
    for t in steps:
        running += delta.get(t, 0)
        out.append(running)
    return out


# -- random instances ----------------------------------------------------------------


def gen_random_instance(
    seed: int,
    max_nodes: int = 8,
    max_edges: int = 12,
    max_requests: int = 20,
    max_k: int = 3,
    max_benefit: int = 5,
    horizon: int = 30,
) -> tuple[PhysicalNetwork, list[Event], dict]:
    """Seeded connected network plus a trace that satisfies the small-demand condition.

    Capacities sit just above the small-demand threshold so that a handful
    of requests already congests a link.
    """
    rng = random.Random(seed)
    n = rng.randint(3, max_nodes)
    m = rng.randint(n - 1, max(n - 1, max_edges))
    k = rng.randint(1, max_k)
    b_max = rng.randint(1, max_benefit)
    params = WeightParams(p_max=n * k, b_max=b_max, k=k)
    d_max = rng.randint(1, 3)
    c_min = math.ceil(3 * k * params.phi * d_max)

    def capacity() -> int:
        return c_min if rng.random() < 0.5 else c_min + rng.randint(0, c_min)

    names = [f"n{i}" for i in range(n)]
    nodes = {v: capacity() for v in names}
    edges = []
    for i in range(1, n):
        edges.append(Edge(f"e{i - 1}", names[rng.randrange(i)], names[i], capacity()))
    while len(edges) < m:
        u, v = rng.sample(names, 2)
        edges.append(Edge(f"e{len(edges)}", u, v, capacity()))
    net = PhysicalNetwork(nodes, edges)
    edge_ids = [e.id for e in edges]

    def some_nodes(limit: int) -> list[str]:
        return rng.sample(names, rng.randint(1, max(1, limit)))

    def make_request(rid: str) -> Request:
        src, dst = some_nodes(1 if rng.random() < 0.8 else 2), some_nodes(1 if rng.random() < 0.8 else 2)
        benefit = rng.randint(1, b_max)
        kind = rng.choice(["route", "chain", "regex"] if k >= 2 else ["route"])
        if kind == "route":
            restrict = rng.sample(edge_ids, rng.randint((m + 1) // 2, m)) if rng.random() < 0.2 else None
            return simple_routing(rid, src, dst, rng.randint(1, d_max), benefit, restrict)
        if kind == "chain":
            n_act = rng.randint(1, k - 1)
            return serial_chain(
                [some_nodes(n // 2) for _ in range(n_act)],
                [rng.randint(1, d_max) for _ in range(n_act + 1)],
                benefit,
                source=src,
                sink=dst,
                request_id=rid,
                action_demands=[rng.randint(1, d_max) for _ in range(n_act)],
            )
        symbols = ["fw", "dpi", "nat", "enc"]
        branches = []
        for _ in range(2):
            length = rng.randint(1, k - 1)
            branches.append("·".join(rng.choice(symbols) for _ in range(length)))
        placement = {s: some_nodes(n // 2) for s in symbols}
        return from_regex(" | ".join(branches), placement, rng.randint(1, d_max), benefit, source=src, sink=dst, request_id=rid)

    keyed: list[tuple[int, int, int, Event]] = []
    for j in range(rng.randint(1, max_requests)):
        req = make_request(f"r{j}")
        validate(req, net, params)
        arrive = rng.randrange(horizon)
        keyed.append((arrive, 1, j, Event.arrival(arrive, req)))
        if rng.random() < 0.85:
            leave = arrive + rng.randint(1, max(1, horizon // 2))
            keyed.append((leave, 0, j, Event.departure(leave, req.id)))
    events = [ev for *_, ev in sorted(keyed, key=lambda x: x[:3])]
    return net, events, {"k": k, "b_max": b_max, "p_max": n * k}
