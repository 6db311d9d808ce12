"""Exception hierarchy shared by every module of the package."""


class FusionLinkError(Exception):
    """Base class for all library errors."""


class InvalidPermutation(FusionLinkError):
    pass


class ClosureTooLarge(FusionLinkError):
    pass


class TooLarge(FusionLinkError):
    pass


class NotSubgroup(FusionLinkError):
    pass


class GroupMismatch(FusionLinkError):
    pass


class NotLeftFree(FusionLinkError):
    pass


class FactorizationNotFound(FusionLinkError):
    pass


class AxiomViolation(FusionLinkError):
    pass


class RelationViolated(FusionLinkError):
    """A local-system assignment is not functorial.

    ``witness`` carries the offending composable pair ``(g, f)`` of morphism
    ids when one is known.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class DegreeOutOfRange(FusionLinkError):
    pass


class DegreeTooLarge(FusionLinkError):
    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class EquivarianceViolated(FusionLinkError):
    pass


class NotExact(FusionLinkError):
    pass


class NotNilpotent(FusionLinkError):
    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class NonUnitScalar(FusionLinkError):
    pass


class InputError(FusionLinkError):
    """Malformed input file; raised by the loaders used by the CLI."""
