"""Exception and warning types raised across the package."""


class PhononProbeError(Exception):
    """Base class for all package errors."""


class DomainError(PhononProbeError, ValueError):
    """An argument lies outside the domain of an operation."""


class SingularityError(PhononProbeError, ArithmeticError):
    """A linear system is singular (e.g. repeated Lamb-Dicke parameters)."""


class IllConditionedError(PhononProbeError, ArithmeticError):
    """A linear system is too ill-conditioned to give trustworthy output."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class PrecisionError(PhononProbeError, ArithmeticError):
    """A truncation or approximation error exceeds the requested tolerance."""


class UndefinedError(PhononProbeError, ArithmeticError):
    """A quantity is mathematically undefined for the given input."""


class InconsistencyError(PhononProbeError, ValueError):
    """Input data are incompatible with the assumed model."""


class ResourceError(PhononProbeError, MemoryError):
    """A requested Hilbert space exceeds the configured size cap."""

    def __init__(self, message, size=None):
        super().__init__(message)
        self.size = size


class TruncationWarning(UserWarning):
    """Probability mass was lost when truncating a state to a finite Fock basis."""
