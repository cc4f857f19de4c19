"""Exception types shared across the package."""


class OneRangeError(Exception):
    """Base class for all package errors."""


class DomainError(OneRangeError, ValueError):
    """An argument lies outside the domain of the operation."""


class DivergentIntegralError(OneRangeError, ArithmeticError):
    """An integral required by the operation does not exist."""


class DivergentTargetError(OneRangeError, ValueError):
    """The function to be expanded is not a member of the Hilbert space."""


class AccuracyError(OneRangeError, ArithmeticError):
    """A quadrature did not reach its accuracy target under refinement."""


class WindowError(OneRangeError, ValueError):
    """A decay-fit window is unusable (too short or contains zeros)."""


class PoleError(DomainError):
    """Evaluation at a pole."""
