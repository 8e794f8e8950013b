"""Exception hierarchy shared by every module."""

from __future__ import annotations


class GvcError(Exception):
    """Base class for all engine errors."""


class UndeclaredSymbol(GvcError):
    pass


class ParityMismatch(GvcError):
    pass


class DegreeOverflow(GvcError):
    pass


class NotTrivial(GvcError):
    pass


class NotFound(GvcError):
    pass


class PreconditionFailed(GvcError):
    pass


class NotGaugeCurrent(GvcError):
    pass


class NotASymmetry(GvcError):
    pass


class GradingMismatch(GvcError):
    pass


class MissingTower(GvcError):
    pass


class NotNilpotent(GvcError):
    pass


class UnpairedVariable(GvcError):
    pass


class BadAlgebra(GvcError):
    pass


class BadShape(GvcError):
    pass


class ValidationError(GvcError):
    pass


class ParseError(GvcError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")
