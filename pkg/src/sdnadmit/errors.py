"""Exception hierarchy.

Each class maps to one CLI exit code (see ``sdnadmit.cli``).
"""

from __future__ import annotations


class SdnAdmitError(Exception):
    """Base class for all errors raised by this package."""


class NetworkError(SdnAdmitError):
    """Malformed physical network."""


class ValidationError(SdnAdmitError):
    """A request or trace fails structural validation.

    ``code`` is a short machine-readable tag such as ``"multiple-sources"``.
    """

    def __init__(self, code: str, message: str = "") -> None:
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


class TraceError(SdnAdmitError):
    """Inconsistent event stream (duplicate ids, unknown departures, time going backwards)."""


class ContractViolation(SdnAdmitError):
    """A function was called with inputs outside its contract."""


class AccountingError(SdnAdmitError):
    """Flow bookkeeping went wrong: negative flow, double free, unknown allocation."""


class InvariantViolation(SdnAdmitError):
    """An internal invariant that correct admission must maintain was broken."""


class CapacityViolation(InvariantViolation):
    """Some resource would carry more flow than its capacity."""
