"""Exception hierarchy shared by all modules."""


class PulseNoiseError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(PulseNoiseError, ValueError):
    """A model or law was constructed with parameters outside its domain."""


class DomainError(PulseNoiseError, ValueError):
    """A function argument lies outside the function's domain."""


class ConditionViolatedError(PulseNoiseError, ValueError):
    """The ensemble does not satisfy the 1/f condition alpha + 2 beta + 2 = 0."""


class QuadratureError(PulseNoiseError, ArithmeticError):
    """Numerical integration did not reach the requested accuracy."""


class AccuracyError(PulseNoiseError, ArithmeticError):
    """A special-function evaluation could not meet its accuracy target."""


class ResourceLimitError(PulseNoiseError, RuntimeError):
    """A simulation would exceed its configured packet budget."""


class EmptyTraceError(PulseNoiseError, ValueError):
    """An operation needs events but the trace has too few of them."""


class GridMismatchError(PulseNoiseError, ValueError):
    """Spectrum estimates being combined are on different frequency grids."""


class InsufficientPointsError(PulseNoiseError, ValueError):
    """Too few usable points were available for a fit."""


class TraceFormatError(PulseNoiseError, ValueError):
    """A trace, spectrum or config file could not be parsed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)
