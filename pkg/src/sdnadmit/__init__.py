"""Online admission control for SDN/NFV requests under the accept/standby model."""

from sdnadmit.errors import (
    AccountingError,
    CapacityViolation,
    ContractViolation,
    InvariantViolation,
    NetworkError,
    SdnAdmitError,
    TraceError,
    ValidationError,
)
from sdnadmit.net_model import LoadState, PhysicalNetwork, WeightParams, exp_load
from sdnadmit.request_model import PrGraph, Request, from_regex, serial_chain, simple_routing
from sdnadmit.product import Realization, build_product, expand, fold, realization_weight
from sdnadmit.oracle import enumerate_realizations, find_realization
from sdnadmit.allocator import allocate, free
from sdnadmit.scheduler import Scheduler

__all__ = [
    "AccountingError",
    "CapacityViolation",
    "ContractViolation",
    "InvariantViolation",
    "LoadState",
    "NetworkError",
    "PhysicalNetwork",
    "PrGraph",
    "Realization",
    "Request",
    "Scheduler",
    "SdnAdmitError",
    "TraceError",
    "ValidationError",
    "WeightParams",
    "allocate",
    "build_product",
    "enumerate_realizations",
    "exp_load",
    "expand",
    "find_realization",
    "fold",
    "free",
    "from_regex",
    "realization_weight",
    "serial_chain",
    "simple_routing",
]

__version__ = "0.1.0"
