"""Exception types shared across the package."""


class SdofError(Exception):
    """Base class for all sdofsim errors."""


class InvalidParameterError(SdofError, ValueError):
    """A parameter is outside its admissible range."""


class DimensionError(SdofError, ValueError):
    """Array shapes do not agree with the antenna configuration."""


class NotApplicableError(SdofError):
    """The requested scheme or formula does not apply to this configuration."""


class PreconditionError(SdofError):
    """Required input data (e.g. delayed channel state) is missing."""


class DegenerateDrawError(SdofError):
    """A measure-zero channel draw made a linear system singular.

    Callers resample the trial and count the event.
    """


class NumericalError(SdofError, ArithmeticError):
    """A linear-algebra evaluation produced a non-finite value."""


class TooLargeError(SdofError):
    """An exhaustive enumeration would exceed the state-space limit."""

    def __init__(self, message, size=None, limit=None):
        super().__init__(message)
        self.size = size
        self.limit = limit
