"""Exception hierarchy shared by the library and the CLI.

Every error carries a short machine-readable ``code`` (stable across
releases, used verbatim in CLI error JSON) and an ``exit_code`` that the
CLI maps to its process exit status.
"""

from __future__ import annotations


class CwPhaseError(Exception):
    """Base class for all package errors."""

    exit_code = 1

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


class InvalidParamsError(CwPhaseError):
    """A parameter is outside the mathematical domain of the operation."""

    exit_code = 2


class NoConvergenceError(CwPhaseError):
    """An iterative solver or series failed to reach its tolerance."""

    exit_code = 3


class PreconditionError(CwPhaseError):
    """The state does not satisfy the operation's precondition."""

    exit_code = 4
