"""Exception types shared across the simulation suite."""


class IsccError(Exception):
    """Base class for all errors raised by :mod:`iscc_sim`."""


class InvalidInputError(IsccError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateSignalError(IsccError):
    """The sample sequence does not support the requested model order."""

    def __init__(self, message, achieved_rank):
        super().__init__(message)
        self.achieved_rank = achieved_rank


class UnidentifiableError(IsccError):
    """The Fisher information matrix is singular for this configuration."""


class DegenerateUpdateError(IsccError):
    """A Kalman update hit a numerically singular innovation covariance."""


class ConfigError(IsccError):
    """Configuration file could not be parsed or validated."""

    def __init__(self, message, key=None, line=None):
        where = ""
        if key is not None:
            where += f" key '{key}'"
        if line is not None:
            where += f" (line {line})"
        super().__init__(f"{message}{':' if where else ''}{where}")
        self.key = key
        self.line = line
