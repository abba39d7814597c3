"""Exception hierarchy shared by every module."""


class PowmodError(Exception):
    """Base class for all package errors."""


class DomainError(PowmodError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(PowmodError, IndexError):
    """A cutoff exceeds the precomputed table it is evaluated against."""


class ResourceError(PowmodError, MemoryError):
    """A request exceeds a configured size cap."""


class PrecisionError(PowmodError, ArithmeticError):
    """A requested error target cannot be met within the term cap."""
