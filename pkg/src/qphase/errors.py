"""Exception types raised by the quantization routines."""


class QPhaseError(Exception):
    """Base class for all errors raised by :mod:`qphase`."""


class DomainError(QPhaseError, ValueError):
    """Input outside the domain where the requested quantity exists."""


class NotNormalized(QPhaseError, ValueError):
    """Operator trace deviates from one by more than its tail bound allows."""


class TruncationTooCoarse(QPhaseError):
    """Fock truncation loses more mass than the requested accuracy permits."""


class QuadratureError(QPhaseError, RuntimeError):
    """Numerical integration failed to reach the requested tolerance."""


class NotQuantizable(QPhaseError):
    """The density has no physical quantization for the chosen ordering.

    ``entries`` carries the limiting (non-positive) diagonal, or ``None``
    when no finite limit exists.
    """

    def __init__(self, message, entries=None):
        super().__init__(message)
        self.entries = entries
