"""Exception hierarchy shared by every module."""


class LapincError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(LapincError, ValueError):
    """Malformed input text. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(LapincError, ValueError):
    """An argument lies outside the domain of the operation."""


class PreconditionError(LapincError):
    """A structural precondition does not hold (duplicate edge, missing node, ...)."""


class NotFoundError(PreconditionError, KeyError):
    """A referenced node or edge does not exist."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class DisconnectedError(DomainError):
    """The operation requires a connected graph."""


class BridgeSuspectedError(DomainError):
    """Non-bridge deletion refused because the edge looks like a bridge."""


class NumericalError(LapincError, ArithmeticError):
    """A numerical consistency check failed beyond tolerance."""


class HeuristicFailed(LapincError):
    """The rich-club split could not produce a useful partition."""


class GenerationError(LapincError):
    """A random graph with the requested property could not be generated."""
