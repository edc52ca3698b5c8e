from typing import Optional


class LabError(ValueError):
    """Base class for every domain error raised by the laboratory"""


class GridMismatchError(LabError):
    """Operands live on different grids"""


class LadderError(LabError):
    """Scale ladder is empty or outside the bounds of its grid"""


class DegenerateInputError(LabError):
    """Input is identically (numerically) zero where a ratio is required"""


class ExponentRangeError(LabError):
    """Exponent outside the range an exponent relation is defined on"""


class ConfigError(LabError):
    """
    Malformed experiment config file

    Args:
        message: What went wrong
        line: 1-based line number in the config file, when known
    """

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class TruncationWarning(UserWarning):
    """
    A function does not decay at the edge of its box

    The operation still runs; `shell_mass` is the largest modulus found on the
    outer 10% shell and is recorded by the harness as a diagnostic.
    """

    def __init__(self, message: str, shell_mass: float):
        self.shell_mass = shell_mass
        super().__init__(message)
