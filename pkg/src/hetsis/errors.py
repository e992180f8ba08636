"""Exception types shared across the package.

Every failure mode maps onto one of these so callers (and the CLI exit-code
logic) can tell bad input apart from numerical trouble.
"""


class HetsisError(Exception):
    """Base class for package errors."""


class InvalidArgumentError(HetsisError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateInputError(HetsisError, ValueError):
    """Input is structurally valid but has no usable mass (e.g. underflow)."""


class InsufficientDataError(HetsisError, ValueError):
    """Too few data points for the requested estimate."""


class NoCrossingError(HetsisError, RuntimeError):
    """A bracketing search found no sign change in the allowed range."""


class InternalSolverError(HetsisError, RuntimeError):
    """An iteration failed to converge; indicates a bug or pathological input."""


class OutputLockError(HetsisError, RuntimeError):
    """Another experiment process holds the output directory lock."""
