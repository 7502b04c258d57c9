"""Exception hierarchy shared by every module."""

from __future__ import annotations


class FractalFormsError(Exception):
    """Base class for all library errors."""

    code = "ERROR"


class DomainError(FractalFormsError, ValueError):
    """An input lies outside the domain of an operation."""

    code = "DOMAIN_ERROR"


class ResourceLimitError(FractalFormsError):
    """A requested level exceeds the configured maximum."""

    code = "RESOURCE_LIMIT"


class DegenerateCellError(FractalFormsError, ArithmeticError):
    """A cell carries zero reference mass where positive mass is required."""

    code = "DEGENERATE_CELL"


class SolverError(FractalFormsError, ArithmeticError):
    """A numerical solver failed; ``best_value`` holds the best feasible value, if any."""

    code = "SOLVER_ERROR"

    def __init__(self, message: str, best_value: float | None = None):
        super().__init__(message)
        self.best_value = best_value


class ParseError(FractalFormsError, ValueError):
    """Syntax error in an expression, with byte offset and the expected tokens."""

    code = "PARSE_ERROR"

    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        detail = f"{message} at offset {offset}"
        if expected:
            detail += f" (expected one of: {', '.join(sorted(expected))})"
        super().__init__(detail)
        self.offset = offset
        self.expected = expected


class UnknownIdentifierError(ParseError):
    code = "UNKNOWN_IDENTIFIER"


class InvariantViolation(FractalFormsError, ArithmeticError):
    """A computed object breaks a structural invariant beyond tolerance (an upstream bug, not noise)."""

    code = "INVARIANT_VIOLATION"
