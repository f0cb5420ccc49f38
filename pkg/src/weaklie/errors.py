"""Exception hierarchy for the weaklie toolkit."""


class WeaklieError(Exception):
    """Base class for all toolkit errors."""


class ParseError(WeaklieError):
    """Malformed expression text.  Carries the 0-based position and what was expected."""

    def __init__(self, message, position, expected=None):
        self.position = position
        self.expected = expected
        detail = f"{message} at position {position}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


class UnknownIdentifierError(ParseError):
    """Identifier is not a declared coordinate, parameter or opaque function."""


class ArityMismatchError(ParseError):
    """Opaque function called with the wrong number of arguments."""


class EvaluationDomainError(WeaklieError):
    """Numeric evaluation hit a singularity (cot at sin=0, ln of non-positive,
    fractional power of a negative base, division by zero)."""


class DegenerateMetricError(WeaklieError):
    """Metric determinant vanishes identically on the sampling domain."""


class ConventionMismatchError(WeaklieError):
    """Two independent computations of the same object disagree.

    Signals an implementation sign bug, not a user error."""


class NotInvolutiveError(WeaklieError):
    """A frame bracket leaves the span of the frame: no structure functions exist."""

    def __init__(self, message, pair=None, residual=None):
        self.pair = pair
        self.residual = residual
        super().__init__(message)


class RankDeficientFrameError(WeaklieError):
    """Frame fields are linearly dependent (over functions) where independence is needed."""


class UnknownExampleError(WeaklieError):
    """Catalog name not in the registry."""


class MissingParameterError(WeaklieError):
    """A required catalog parameter was not supplied."""
