"""Exception hierarchy shared by the solvers, models and the CLI."""


class PcdaeError(Exception):
    """Base class for all package errors."""


class SingularJacobian(PcdaeError):
    """A pivot fell below the singularity threshold during factorization."""

    def __init__(self, message, pivot=None, column=None):
        super().__init__(message)
        self.pivot = pivot
        self.column = column


class NewtonDivergence(PcdaeError):
    """Newton iteration failed; ``report`` carries the final diagnostics."""

    def __init__(self, message, report=None, point=None):
        super().__init__(message)
        self.report = report
        self.point = point


class StepSizeUnderflow(PcdaeError):
    """The step controller asked for a step below ``h_min``."""

    def __init__(self, message, t=None, h=None):
        super().__init__(message)
        self.t = t
        self.h = h


class InitializationFailure(PcdaeError):
    pass


class MalformedCase(PcdaeError):
    """Case file could not be parsed; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(PcdaeError):
    pass


class VariableMismatch(PcdaeError):
    pass
