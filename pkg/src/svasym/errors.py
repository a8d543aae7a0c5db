"""Exception types shared across the package."""


class SvasymError(Exception):
    """Base class for all package errors."""


class DomainError(SvasymError, ValueError):
    """An argument lies outside the domain of the requested function."""


class NonConvergent(SvasymError, ArithmeticError):
    """An iterative numerical method failed to reach its tolerance."""


class CapacityExceeded(SvasymError, MemoryError):
    """A computation would need more storage than its guard allows."""


class NoTransition(SvasymError, ValueError):
    """No phase transition exists at the requested parameters."""


class UnknownTarget(SvasymError, KeyError):
    """A reproduction target name is not recognised."""
