"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: validation problems exit with 1,
numeric failures with 2 and I/O failures with 3.
"""


class JCError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class ValidationError(JCError, ValueError):
    """Inputs violate a documented precondition."""

    exit_code = 1


class NumericError(JCError, ArithmeticError):
    """A computation could not produce a trustworthy number."""

    exit_code = 2

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class OutputError(JCError, OSError):
    """Writing an artifact to disk failed."""

    exit_code = 3
