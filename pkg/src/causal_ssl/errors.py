"""Exception hierarchy.

Two families map onto CLI exit codes: ``ConfigError`` (exit 2) for bad
arguments/configuration and ``DataError`` (exit 3) for anything wrong with
the numbers themselves.
"""


class CausalSSLError(Exception):
    pass


class ConfigError(CausalSSLError):
    pass


class DataError(CausalSSLError):
    pass


class UnknownPreset(ConfigError):
    pass


class MissingColumn(DataError):
    def __init__(self, name):
        super().__init__(f"column {name!r} not found in CSV header")
        self.name = name


class NonNumericCell(DataError):
    def __init__(self, row, col, value=None):
        super().__init__(f"row {row}, column {col!r}: cannot parse {value!r} as a real number")
        self.row = row
        self.col = col


class TargetNotBinary(DataError):
    pass


class EmptyFile(DataError):
    pass


class TooFewRows(DataError):
    pass


class SingleClassAfterRetries(DataError):
    pass


class SingleClassLabels(DataError):
    pass


class DimensionMismatch(DataError, ValueError):
    pass


class NonFiniteInput(DataError, ValueError):
    pass


class SingularSystem(DataError):
    pass


class NoPositiveWeights(DataError, ValueError):
    pass
