"""Exception hierarchy.  ``exit_code`` is what the CLI returns."""


class UptError(Exception):
    exit_code = 4


class ValidationError(UptError, ValueError):
    exit_code = 2


class NegativeEntry(ValidationError):
    pass


class SumNotOne(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class IncompatibleAlphabets(ValidationError):
    pass


class WrongAlphabetSize(ValidationError):
    pass


class InvalidChannel(ValidationError):
    pass


class SubsetTooLarge(ValidationError):
    pass


class SymbolReused(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class CapExceeded(UptError):
    exit_code = 3


class TooManySubsets(CapExceeded):
    pass


class TooManyOrderings(CapExceeded):
    pass


class TooManyVertices(CapExceeded):
    pass


class InvariantViolation(UptError):
    exit_code = 4


class LpInfeasible(InvariantViolation):
    pass
