"""Exception hierarchy.

Every error carries a stable machine-readable ``code`` (the class name) and a
``details`` mapping; the CLI serializes both.
"""

from __future__ import annotations

from typing import Any


class RhoHarnackError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 2

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message, "details": self.details}


class UsageError(RhoHarnackError):
    exit_code = 64


# linear algebra / IO
class NonHermitianInput(RhoHarnackError):
    pass


class DimensionMismatch(RhoHarnackError):
    pass


class DimensionError(RhoHarnackError):
    pass


class CapacityError(RhoHarnackError):
    pass


class ParseError(RhoHarnackError):
    def __init__(self, message: str, line: int, column: int, **details: Any) -> None:
        super().__init__(f"{message} (line {line}, column {column})", line=line, column=column, **details)
        self.line = line
        self.column = column


# kernels and radii
class SingularResolvent(RhoHarnackError):
    pass


class UnsupportedRho(RhoHarnackError):
    pass


# spectral
class DefectiveUnimodularEigenvalue(RhoHarnackError):
    pass


class NotReducing(RhoHarnackError):
    pass


class PreconditionFailed(RhoHarnackError):
    pass


# Harnack order
class ClassViolation(RhoHarnackError):
    pass


class NotUnitary(RhoHarnackError):
    pass


class ZeroPolynomial(RhoHarnackError):
    pass


class BadShape(RhoHarnackError):
    pass
