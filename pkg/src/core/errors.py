"""
Exception hierarchy for kocert.
"""

from typing import Optional


class KoError(Exception):
    """Base class for every error raised by the library."""


class ExpressionError(KoError, ValueError):
    """Malformed profile expression."""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class ProfileDomainError(KoError, ValueError):
    """Profile evaluated outside its domain (log of a non-positive number, ...)."""


class ProfileOverflowError(KoError, OverflowError):
    """Profile evaluation overflowed."""


class DimensionMismatchError(KoError, ValueError):
    """Points or fields of different Heisenberg index were combined."""


class SingularPointError(KoError, ValueError):
    """Radial operator evaluated on its singular locus."""


class VanishingGradientError(KoError, ValueError):
    """Horizontal gradient vanishes where the flux A(|grad u|) is needed."""


class MissingConstantError(KoError, ValueError):
    """A structural constant required by a check is absent from the problem."""


class WrongRhsKindError(KoError, ValueError):
    """Requested check does not apply to the problem's right-hand side."""


class QuadratureError(KoError):
    """Quadrature did not converge within its node budget."""


class InversionError(KoError):
    """Monotone inversion could not bracket or converge."""


class TableRangeError(InversionError):
    """A tabulated transform cannot be extended to the requested argument or value."""


class BarrierConstructionError(KoError):
    """A barrier builder exhausted its sigma budget or met an invalid input."""


class WeakQuadratureError(KoError):
    """Weak-form quadrature is under-resolved."""


class SpecFileError(KoError, ValueError):
    """Problem specification file is malformed."""
