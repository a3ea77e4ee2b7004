"""Exception hierarchy shared by all modules."""


class EllUnitError(Exception):
    """Base class for every error raised by ellunits."""


class ExcludedField(EllUnitError):
    """Q(sqrt(-1)) and Q(sqrt(-3)) carry extra units and are not supported."""


class NotFundamental(EllUnitError):
    pass


class ZeroIdeal(EllUnitError):
    pass


class UnitIdeal(EllUnitError):
    pass


class NoAdmissibleLift(EllUnitError):
    pass


class NonInvertibleDeterminant(EllUnitError):
    pass


class LatticeArgument(EllUnitError):
    """phi(u, v, z) with (u, v) integral is identically zero."""


class PrecisionTooLow(EllUnitError):
    pass


class NoClassFound(EllUnitError):
    pass


class SearchExhausted(EllUnitError):
    pass


class RootNotInField(EllUnitError):
    pass


class RecognitionFailure(EllUnitError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
