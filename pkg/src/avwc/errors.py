"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` (bad input, CLI exit
status 2) and :class:`LimitError` (an enumeration guard or numerical limit was
hit, CLI exit status 3).
"""


class AVWCError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(AVWCError, ValueError):
    """Input data does not satisfy a documented precondition."""


class NegativeEntry(ValidationError):
    pass


class RowSumViolation(ValidationError):
    def __init__(self, row, deviation):
        self.row = row
        self.deviation = deviation
        super().__init__(f"row {row} sums to 1{deviation:+.3g}")


class DimensionMismatch(ValidationError):
    pass


class AlphabetMismatch(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class NTooSmall(ValidationError):
    pass


class InconsistentCounts(ValidationError):
    pass


class EmptyTypeClass(ValidationError):
    pass


class UnsupportedR(ValidationError):
    pass


class NonpositiveG(ValidationError):
    pass


class PreconditionNotSymmetrizable(ValidationError):
    """The AVC handed to the pre-coding check is not symmetrizable."""


class HypothesisViolated(ValidationError):
    def __init__(self, q, value, eps):
        self.q = q
        self.value = value
        super().__init__(
            f"hypothesis fails at type {q}: averaged value {value:.6g} < 1 - {eps}")


class ParseError(ValidationError):
    pass


class MissingEveLink(ValidationError):
    pass


class UnknownExample(ValidationError):
    pass


class EpsOutOfRange(ValidationError):
    pass


class LimitError(AVWCError):
    """A computation was refused or abandoned because of a size/iteration limit."""


class BlocklengthTooLarge(LimitError):
    pass


class OptimizerDidNotConverge(LimitError):
    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)


class SolverFailure(LimitError):
    def __init__(self, message, iterate=None):
        self.iterate = iterate
        super().__init__(message)
