"""Exception hierarchy.

Validation problems (bad user input) derive from :class:`TrackingInputError`
and map to CLI exit code 1. Failed runtime self-checks derive from
:class:`InternalInconsistency` and map to exit code 2.
"""


class TrackingError(Exception):
    """Base class for every error raised by qtrack."""


class TrackingInputError(TrackingError, ValueError):
    """The caller supplied data that does not describe a valid problem."""


class NonPhysicalState(TrackingInputError):
    pass


# short alias used by the conversion helpers
NonPhysical = NonPhysicalState


class IdenticalSources(TrackingInputError):
    pass


class IdenticalStates(TrackingInputError):
    pass


class BothTargetsMaximallyMixed(TrackingInputError):
    pass


class InvalidPrior(TrackingInputError):
    pass


class NotARotation(TrackingInputError):
    pass


class DegenerateSources(TrackingInputError):
    pass


class OutOfRange(TrackingInputError):
    pass


class TargetsNotPure(TrackingInputError):
    pass


class TargetsIdentical(TrackingInputError):
    pass


class EmptyGroup(TrackingInputError):
    pass


class WeightsNotNormalized(TrackingInputError):
    pass


class MalformedInput(TrackingInputError):
    """A JSON document is missing a field or has the wrong shape."""


class ProcedureMismatch(TrackingError):
    """An operation specific to one branch of the indicator was called on the other."""


class InternalInconsistency(TrackingError, ArithmeticError):
    """A post-condition that holds analytically failed numerically."""


class DegenerateDivisor(InternalInconsistency):
    pass


class SingularGamma(InternalInconsistency):
    pass
