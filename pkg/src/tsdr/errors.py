"""Exception types raised across the package."""


class TsdrError(Exception):
    """Base class for all package errors."""


class ConstantColumn(TsdrError, ValueError):
    pass


class DegenerateSample(TsdrError, ValueError):
    pass


class TooFewObservations(TsdrError, ValueError):
    pass


class DegenerateResponse(TsdrError, ValueError):
    pass


class SingularCovariance(TsdrError, ValueError):
    pass


class AllZeroSpectrum(TsdrError, ValueError):
    pass


class DimensionMismatch(TsdrError, ValueError):
    pass


class SingularLocalFit(TsdrError, ArithmeticError):
    pass


class SingularNormalEquations(TsdrError, ArithmeticError):
    pass


class PenaltySingular(TsdrError, ArithmeticError):
    pass


class UnknownScenario(TsdrError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown scenario"


class OutOfRange(TsdrError, ValueError):
    pass


class ParseError(TsdrError, ValueError):
    """Malformed input file; ``row`` and ``column`` locate the offending cell (1-based data row)."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class NonNumericCell(ParseError):
    pass


class ConfigError(TsdrError, ValueError):
    pass


class MissingArtifacts(TsdrError, FileNotFoundError):
    pass
