"""Exception hierarchy shared by every module."""


class ExpsampError(Exception):
    """Base class for all errors raised by expsamp."""


class InvalidParameterError(ExpsampError, ValueError):
    """A constructor or operation received an out-of-range parameter."""


class InvalidSizeError(InvalidParameterError):
    pass


class DomainError(ExpsampError, ValueError):
    """A bound was evaluated outside the range where it holds."""


class SpectralDegenerateError(DomainError):
    """The spectral value is 1 (or 0 where a positive value is needed)."""


class ShapeError(ExpsampError, ValueError):
    pass


class SizeLimitError(ExpsampError):
    """An exact computation would exceed its documented size cap."""


class FormatError(ExpsampError, ValueError):
    """Malformed matrix or marking file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
