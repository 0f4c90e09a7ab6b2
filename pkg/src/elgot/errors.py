"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class ElgotError(Exception):
    """Base class for all errors raised by this package."""


class EquationError(ElgotError, ValueError):
    """A flat system violates a well-formedness invariant.

    ``var`` names the variable whose equation is at fault (if any).
    """

    def __init__(self, message: str, var: str | None = None):
        super().__init__(message)
        self.var = var


class UnknownVar(EquationError):
    pass


class UnknownOp(EquationError):
    pass


class ArityMismatch(EquationError):
    pass


class DuplicateVar(EquationError):
    pass


class UnguardedVar(EquationError):
    """A non-flat equation whose right-hand side is a bare variable."""


class MissingParamImage(ElgotError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "missing parameter image"


class VarClash(ElgotError, ValueError):
    pass


class SignatureMismatch(ElgotError, ValueError):
    pass


class NotAMorphism(ElgotError, ValueError):
    pass


class AlgebraError(ElgotError, ValueError):
    """An algebra failed one of its load-time checks."""


class SolverError(ElgotError):
    pass


class NoFixedPoint(SolverError):
    pass


class NonConvergence(SolverError):
    pass


class EmptyCycle(ElgotError, ValueError):
    pass


class ParseError(ElgotError):
    """Syntax or semantic error in an input file, located by path and line."""

    def __init__(self, message: str, path: str = "<string>", line: int | None = None):
        self.message = message
        self.path = path
        self.line = line
        super().__init__(str(self))

    def __str__(self) -> str:
        where = self.path if self.line is None else f"{self.path}:{self.line}"
        return f"{where}: {self.message}"


class NotInCarrier(ElgotError, ValueError):
    """A parameter is not an element of the algebra's carrier."""
