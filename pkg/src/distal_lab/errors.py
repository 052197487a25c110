"""Exception types shared across the package."""


class DistalLabError(Exception):
    """Base class for all errors raised by distal_lab."""


class RationalAngleError(DistalLabError):
    """The input angle is indistinguishable from a rational at the working precision."""


class PrecisionError(DistalLabError):
    """Requested output exceeds what the working precision can certify."""


class DimensionMismatchError(DistalLabError):
    """A point was fed to a flow of a different dimension."""


class SummabilityError(DistalLabError):
    """Cocycle coefficients fail the continuity (summability) requirement."""


class ToleranceError(DistalLabError):
    """A requested tolerance is tighter than the stored truncation supports."""
