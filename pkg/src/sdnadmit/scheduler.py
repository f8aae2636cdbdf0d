"""Event loop of the online algorithm under the accept/standby service model.

Every arrival gets one immediate answer: accepted with a realization, or put
on standby. Accepted requests keep their realization until they depart.
After a served request departs, the standby list is retried once, in the
configured order.
"""

from __future__ import annotations

import bisect
import logging
from collections.abc import Callable
from dataclasses import dataclass

from sdnadmit.allocator import allocate, free
from sdnadmit.errors import TraceError
from sdnadmit.net_model import LoadState, PhysicalNetwork, WeightParams
from sdnadmit.oracle import find_realization
from sdnadmit.product import Realization
from sdnadmit.request_model import Request

log = logging.getLogger(__name__)

RETRY_ORDERS = ("fifo", "benefit", "density")


@dataclass(frozen=True)
class Decision:
    request: str
    accepted: bool
    realization: Realization | None = None


def _signature(req: Request) -> tuple:
    """Everything that affects admission except the id."""
    return (
        req.graph,
        tuple(sorted(req.vertex_demand.items())),
        tuple(sorted(req.edge_demand.items())),
        req.benefit,
        tuple(sorted((x, tuple(sorted(u))) for x, u in req.allowed_nodes.items())),
        tuple(sorted((y, None if u is None else tuple(sorted(u))) for y, u in req.allowed_edges.items())),
    )


class Scheduler:
    def __init__(
        self,
        net: PhysicalNetwork,
        params: WeightParams,
        retry_order: str = "fifo",
        check_invariants: bool = False,
    ) -> None:
        if retry_order not in RETRY_ORDERS:
            raise ValueError(f"retry_order must be one of {RETRY_ORDERS}, got {retry_order!r}")
        self.net = net
        self.params = params
        self.retry_order = retry_order
        self.check_invariants = check_invariants
        self.state = LoadState(net)
        self.active: dict[str, tuple[Request, Realization]] = {}
        self.standby: list[Request] = []
        self.clock = 0
        self.log: list[dict] = []
        self.arrival_seq: dict[str, int] = {}
        self._signatures: dict[str, tuple] = {}
        self._benefit = 0
        self._history_t: list[int] = []
        self._history_b: list[int] = []

    # -- events ---------------------------------------------------------------

    def on_arrival(self, req: Request, t: int | None = None) -> Decision:
        t = self._tick(t)
        if req.id in self.arrival_seq:
            raise TraceError(f"duplicate request id {req.id!r}")
        self.arrival_seq[req.id] = len(self.arrival_seq)
        p = self._route(req)
        if p is not None:
            self._emit(t, "arrival", req.id, "accept", p)
        else:
            self.standby.append(req)
            self._emit(t, "arrival", req.id, "standby")
        self._after_event(t)
        return Decision(req.id, p is not None, p)

    def on_departure(self, request_id: str, t: int | None = None) -> list[str]:
        t = self._tick(t)
        if request_id in self.active:
            req, p = self.active.pop(request_id)
            free(req, p, self.state)
            self._benefit -= req.benefit
            self._emit(t, "departure", request_id, "depart")
            accepted = self._retry_standby(t, request_id)
        else:
            for i, req in enumerate(self.standby):
                if req.id == request_id:
                    del self.standby[i]
                    break
            else:
                raise TraceError(f"departure of unknown or inactive request {request_id!r}")
            self._emit(t, "departure", request_id, "depart")
            # loads did not change, so nobody on standby can fit now
            accepted = []
        self._after_event(t)
        return accepted

    # -- queries --------------------------------------------------------------

    def current_benefit(self) -> int:
        return self._benefit

    def benefit_at(self, t: int) -> int:
        """Benefit of the served set after all events stamped ``<= t``."""
        i = bisect.bisect_right(self._history_t, t)
        return self._history_b[i - 1] if i else 0

    def is_active(self, request_id: str) -> bool:
        return request_id in self.active or any(r.id == request_id for r in self.standby)

    def active_requests(self) -> list[Request]:
        reqs = [req for req, _ in self.active.values()] + list(self.standby)
        return sorted(reqs, key=lambda r: self.arrival_seq[r.id])

    def standby_is_complete(self) -> bool:
        """True iff no standby request could be admitted against the current loads."""
        return all(find_realization(self.net, r, self.state, self.params) is None for r in self.standby)

    # -- internals ------------------------------------------------------------

    def _tick(self, t: int | None) -> int:
        if t is None:
            return self.clock
        if t < self.clock:
            raise TraceError(f"event at t={t} precedes current time {self.clock}")
        self.clock = t
        return t

    def _route(self, req: Request) -> Realization | None:
        p = allocate(req, self.state, self.net, self.params)
        if p is not None:
            self.active[req.id] = (req, p)
            self._benefit += req.benefit
        return p

    def _retry_key(self) -> Callable[[Request], tuple]:
        seq = self.arrival_seq
        if self.retry_order == "benefit":
            return lambda r: (-r.benefit, seq[r.id])
        if self.retry_order == "density":
            return lambda r: (-r.benefit / r.total_demand(), seq[r.id])
        return lambda r: (seq[r.id],)

    def _retry_standby(self, t: int, trigger: str) -> list[str]:
        accepted: list[str] = []
        failed: set[tuple] = set()
        still_waiting: list[Request] = []
        for req in sorted(self.standby, key=self._retry_key()):
            sig = self._signatures.get(req.id)
            if sig is None:
                sig = self._signatures[req.id] = _signature(req)
            # loads only grow during a pass, so an identical request that already failed fails again
            p = None if sig in failed else self._route(req)
            if p is None:
                failed.add(sig)
                still_waiting.append(req)
            else:
                accepted.append(req.id)
                self._emit(t, "departure", req.id, "accept", p, trigger=trigger)
        self.standby = sorted(still_waiting, key=lambda r: self.arrival_seq[r.id])
        return accepted

    def _emit(self, t: int, event: str, rid: str, decision: str, p: Realization | None = None, **extra) -> None:
        entry = {"t": t, "event": event, "request": rid, "decision": decision}
        if p is not None:
            entry["realization"] = p.as_dict()
        entry.update(extra)
        self.log.append(entry)
        log.debug("t=%s %s %s -> %s", t, event, rid, decision)

    def _after_event(self, t: int) -> None:
        if self._history_t and self._history_t[-1] == t:
            self._history_b[-1] = self._benefit
        else:
            self._history_t.append(t)
            self._history_b.append(self._benefit)
        if self.check_invariants:
            self.state.check()
