"""Exception hierarchy shared by all dlia modules."""


class DliaError(Exception):
    """Base class for every error raised by this package."""


class NumericError(DliaError, ValueError):
    pass


class ZeroMatrix(NumericError):
    pass


class NotHermitian(NumericError):
    pass


class NotPositiveDefinite(NumericError):
    pass


class IllConditioned(NumericError):
    pass


class NoNullSpace(NumericError):
    pass


class DimensionMismatch(DliaError, ValueError):
    pass


class InvalidDimensions(DimensionMismatch):
    pass


class InvalidParam(DliaError, ValueError):
    pass


class OutOfRange(InvalidParam):
    pass


class NonPositiveDistance(InvalidParam):
    pass


class InvalidPosition(InvalidParam):
    pass


class InfeasibleConfig(DliaError, ValueError):
    pass


class InfeasibleSubset(NumericError):
    pass


class WindowTooSmall(DliaError, ValueError):
    pass


class ParseError(DliaError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class ValidationError(DliaError):
    def __init__(self, key, reason):
        self.key = key
        self.reason = reason
        super().__init__(f"{key}: {reason}")
