"""Exception types shared across the package.

Each class carries the CLI exit code it maps to.
"""


class FresnelError(Exception):
    exit_code = 4


class ConfigError(FresnelError, ValueError):
    exit_code = 2


class UnimodularityError(ConfigError):
    """A ray matrix or (s, r) pair violates the unimodularity constraint."""


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None, token=None):
        self.line = line
        self.column = column
        self.token = token
        where = f" at line {line}, column {column}" if line is not None else ""
        near = f" near {token!r}" if token is not None else ""
        super().__init__(f"{message}{where}{near}")


class DegenerateTransformError(FresnelError):
    """The requested representation or kernel is singular for this transform."""

    exit_code = 3


class NumericalError(FresnelError, ArithmeticError):
    exit_code = 4
