"""Exception types shared across the library."""


class GmError(Exception):
    """Base class for all library errors."""


class ConfigError(GmError):
    """A configuration document is malformed or inconsistent."""


class NonCommutingSquare(GmError):
    """A diagonal fill-in was requested for a square that does not commute."""


class KindMismatch(GmError):
    """A grade, element, or operation was used with the wrong monad kind."""


class NotFunctorial(GmError):
    """Per-probe element data is not closed under the functor action."""


class BoundExceeded(GmError):
    """A list operation produced a list longer than the configured bound."""


class TensorNotClosed(GmError):
    """A tensor product landed outside the enumerated grade carrier."""


class GradeViolation(GmError):
    """A graded unit or multiplication broke its membership postcondition."""


class NotAGrading(GmError):
    """User-supplied grading data violates the grading laws."""


class PreconditionFailed(GmError):
    """A checked precondition (e.g. cartesianness) does not hold."""


class SkewNotSupported(GmError):
    """Operation grading is only defined over non-skew (monoidal) instances."""


class SquareDoesNotCommute(GmError):
    """An operation-grading square precondition failed."""


class UnsupportedKind(GmError):
    """No closed form (or other feature) exists for this monad kind."""


class CarrierTooLarge(GmError):
    """The grade carrier exceeds the configured enumeration bound."""
