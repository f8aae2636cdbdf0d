"""ALLOCATE and its inverse.

Weights are taken from the state before the request's own flow is added.
Flow charged to an edge is the demand of the PR-edge whose segment uses it;
flow charged to a node is the demand of the action placed there, once per
placement.
"""

from __future__ import annotations

from sdnadmit.errors import AccountingError, CapacityViolation
from sdnadmit.net_model import LoadState, PhysicalNetwork, WeightParams
from sdnadmit.oracle import find_realization
from sdnadmit.product import Realization
from sdnadmit.request_model import Request


def commit(req: Request, p: Realization, state: LoadState) -> None:
    """Charge ``p`` to ``state`` atomically (all resources or none)."""
    if req.id in state.allocations:
        raise AccountingError(f"request {req.id!r} already holds an allocation")
    charges = p.charges(req)
    for z, amount in charges.items():
        if state.flow[z] + amount > state.net.capacity(z):
            raise CapacityViolation(
                f"admitting {req.id!r} would put {state.flow[z] + amount} on {z!r} (capacity {state.net.capacity(z)})"
            )
    for z, amount in charges.items():
        state.add_flow(z, amount)
    state.allocations[req.id] = charges


def allocate(req: Request, state: LoadState, net: PhysicalNetwork, params: WeightParams) -> Realization | None:
    p = find_realization(net, req, state, params)
    if p is not None:
        commit(req, p, state)
    return p


def free(req: Request, p: Realization, state: LoadState) -> None:
    charges = state.allocations.get(req.id)
    if charges is None:
        raise AccountingError(f"request {req.id!r} has no allocation to free")
    if charges != p.charges(req):
        raise AccountingError(f"realization passed for {req.id!r} differs from the one allocated")
    for z, amount in charges.items():
        state.add_flow(z, -amount)
    del state.allocations[req.id]
