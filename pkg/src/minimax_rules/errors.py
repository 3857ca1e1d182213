"""Exception hierarchy shared by every module."""

from __future__ import annotations


class MinimaxError(Exception):
    """Base class for all package errors."""


class ValidationError(MinimaxError, ValueError):
    """Input data violates a structural precondition."""


class DuplicateLabel(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonFiniteEntry(ValidationError):
    pass


class UnknownLabel(ValidationError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class UnknownScenario(UnknownLabel):
    pass


class EmptyScenarioSet(ValidationError):
    pass


class InvalidProbability(ValidationError):
    pass


class NotUniqueMinimizer(ValidationError):
    pass


class TooManyProjects(ValidationError):
    pass


class OutOfBounds(ValidationError):
    pass


class ParseError(ValidationError):
    """Malformed input file; carries the 1-based location when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class SolverError(MinimaxError):
    """Numerical routine could not produce a trustworthy answer."""


class NumericFailure(SolverError):
    pass


class IterationLimit(SolverError):
    pass


class Infeasible(SolverError):
    pass
