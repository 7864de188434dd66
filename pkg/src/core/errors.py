"""
Exception hierarchy shared by every package.
"""


class ForensicsError(Exception):
    """Base exception for toolkit errors."""
    pass


class ConfigurationError(ForensicsError):
    """Raised when an experiment config or CLI input is invalid."""
    pass


class ShapeError(ForensicsError, ValueError):
    """Raised when a tensor does not match the expected shape."""
    pass


class TemplateFormatError(ForensicsError):
    """Raised when a template-set or weights file is malformed."""
    pass


class EmptyCorpusError(ForensicsError):
    """Raised when an operation receives no images."""
    pass


class UnknownManipulatorError(ForensicsError, ValueError):
    """Raised when a manipulator kind is not registered."""
    pass


class CodecError(ForensicsError):
    """Raised when JPEG encoding or decoding fails."""
    pass


class MetricError(ForensicsError, ValueError):
    """Raised when a metric receives degenerate input."""
    pass


class DivergenceError(ForensicsError):
    """Raised when the training loss becomes non-finite or explodes."""

    def __init__(self, message: str, step: int = -1, value: float = float("nan")):
        super().__init__(message)
        self.step = step
        self.value = value
