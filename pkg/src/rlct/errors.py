"""Exception hierarchy shared by the library and the CLI.

Each class carries the process exit code the CLI maps it to, so command
handlers can translate any library failure uniformly.
"""


class RlctError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class NetlistError(RlctError):
    """Netlist text could not be parsed or fails structural validation."""

    exit_code = 2

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class StructureError(RlctError):
    """A realization violates the structural conditions of its class."""

    exit_code = 3


class ImproperBehaviorError(StructureError):
    """The external behavior has no proper transfer function."""


class SolverError(RlctError):
    """A numerical solve failed (singular system, no stabilizing solution)."""

    exit_code = 4


class ConvergenceError(RlctError):
    """An iteration or simulation failed to converge."""

    exit_code = 5
