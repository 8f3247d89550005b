"""Exception taxonomy shared by the library and the CLI.

The CLI maps these onto exit codes: UsageError -> 2, DomainError and
NumericError -> 1. Library code raises them directly.
"""


class XPhaseError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class UsageError(XPhaseError):
    """Caller broke a precondition (bad argument, bad config key, bad flavor)."""

    exit_code = 2


class DomainError(XPhaseError):
    """Inputs are well-formed but outside the physical domain of the operation."""

    exit_code = 1


class NumericError(XPhaseError):
    """A numerical routine failed to converge or lost required accuracy."""

    exit_code = 1
