"""
Exception hierarchy for the secure regression package
"""
from typing import Any


class SecureLogRegError(Exception):
    """Root of every error raised by this package"""


# Configuration
class ConfigError(SecureLogRegError, ValueError):
    pass


class InvalidParamsError(ConfigError):
    """Sharing parameters or protocol configuration out of range"""


class InvalidSpecError(ConfigError):
    """Synthetic data specification out of range"""


# Finite field / secret sharing
class SharingError(SecureLogRegError):
    pass


class FieldOverflowError(SharingError, OverflowError):
    """Encoded magnitude exceeds the field headroom"""


class ZeroInverseError(SharingError, ZeroDivisionError):
    pass


class InsufficientSharesError(SharingError):
    pass


class DuplicateEvalPointError(SharingError):
    pass


class ShapeMismatchError(SharingError):
    pass


class ScaleMismatchError(SharingError):
    pass


class LayoutMismatchError(SharingError):
    """Tensors disagree on (t, w), modulus or evaluation points"""


# Regression
class RegressionError(SecureLogRegError):
    pass


class DimensionMismatchError(RegressionError, ValueError):
    pass


class SingularSystemError(RegressionError):
    """H + lambda*I is not positive definite (collinearity or separation with lambda=0)"""


class NotConvergedError(RegressionError):
    """max_iter reached; the partial result is attached"""

    def __init__(self, message: str, result: Any = None):
        super().__init__(message)
        self.result = result


# Protocol
class ProtocolError(SecureLogRegError):
    pass


class MissingSubmissionError(ProtocolError):
    pass


class IterationMismatchError(ProtocolError):
    pass


# Data
class DataError(SecureLogRegError):
    pass


class CSVParseError(DataError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class NonBinaryResponseError(DataError):
    pass


class MissingColumnError(DataError):
    pass


class TooManyPartitionsError(DataError):
    pass
