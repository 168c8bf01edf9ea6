"""Exception hierarchy shared by the bound machinery."""


class PCRLBError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(PCRLBError):
    """A numerical step could not be completed."""


class NotPositiveDefinite(NumericalError):
    pass


class SingularInformation(NumericalError):
    pass


class SingularInnerTerm(NumericalError):
    pass


class DimensionMismatch(PCRLBError, ValueError):
    pass


class ShapeMismatch(PCRLBError, ValueError):
    pass


class OutOfSupport(NumericalError):
    pass


class SingularGradient(NumericalError):
    pass


class UndefinedBearing(NumericalError):
    pass


class AllWeightsZero(NumericalError):
    pass


class ZeroTransitionMass(NumericalError):
    pass


class ConfigError(PCRLBError, ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class SequenceFailure(NumericalError):
    """A per-sequence pipeline failed at measurement sequence ``j``, step ``t``."""

    def __init__(self, j, t, cause):
        super().__init__(f"sequence j={j} failed at t={t}: {type(cause).__name__}: {cause}")
        self.j = j
        self.t = t
        self.cause = cause
