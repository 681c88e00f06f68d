"""Exception types shared across the package.

Exit-code mapping used by the command line driver:

* :class:`InvalidInputError` -> 2 (malformed or out-of-contract input)
* :class:`CapExceededError` -> 3 (a size or work cap would be exceeded)
* :class:`VerificationError` -> 4 (an internal cross-check failed)
"""


class CoarseLabError(Exception):
    """Base class for all package errors."""


class InvalidInputError(CoarseLabError, ValueError):
    """Raised when an argument violates a documented precondition."""


class DisconnectedGraphError(InvalidInputError):
    """Raised when an operation requires a connected graph."""


class CapExceededError(CoarseLabError):
    """Raised when an exact computation would exceed its size cap.

    Callers can retry with a larger cap or switch to an approximate
    route where one exists.
    """


class VerificationError(CoarseLabError):
    """Raised when a result fails its independent internal check."""
