"""Exception types raised across the package."""


class SggError(Exception):
    """Base class for all errors raised by sggica."""


class DomainError(SggError, ValueError):
    """An argument lies outside the domain of a function or distribution."""


class InsufficientDataError(SggError, ValueError):
    pass


class DegenerateSideError(SggError, ValueError):
    """A projected component has no samples on one side of the split point.

    ``component`` is the index of the offending projection direction and
    ``side`` is ``"left"`` or ``"right"``.
    """

    def __init__(self, component, side):
        self.component = component
        self.side = side
        super().__init__(f"component {component} has no samples on the {side} side")


class SingularMatrixError(SggError, ValueError):
    pass


class SingularGradientError(SggError, ValueError):
    pass


class FitError(SggError, RuntimeError):
    """Model fitting failed; ``diagnostics`` carries per-restart messages."""

    def __init__(self, message, diagnostics=()):
        self.diagnostics = list(diagnostics)
        super().__init__(message)


class MetricError(SggError, ValueError):
    pass


class SignalIOError(SggError, ValueError):
    """Malformed or unsupported input file.

    ``line`` (1-based) or ``offset`` (byte position) locate the problem when known.
    """

    def __init__(self, message, path=None, line=None, offset=None):
        self.path = path
        self.line = line
        self.offset = offset
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte {offset}")
        prefix = ": ".join([", ".join(where)]) + ": " if where else ""
        super().__init__(prefix + message)


class UnsupportedFormatError(SignalIOError):
    pass
