# nevae/errors.py

from typing import Optional


class NevaeError(Exception):
    """Base class for every error raised by nevae."""


class ShapeError(NevaeError, ValueError):
    def __init__(self, op: str, left: tuple, right: Optional[tuple] = None, detail: str = ""):
        self.op = op
        self.left = tuple(left)
        self.right = tuple(right) if right is not None else None
        shapes = f"{self.left}" if self.right is None else f"{self.left} and {self.right}"
        message = f"{op}: incompatible shapes {shapes}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class DomainError(NevaeError, ValueError):
    """A value outside the domain of an operation, or a non-finite result."""


class TapeError(NevaeError):
    """Backward pass requested without an active tape or from a non-scalar root."""


class IdxFormatError(NevaeError):
    """Malformed IDX container."""


class BadMagicError(IdxFormatError):
    pass


class TruncatedFileError(IdxFormatError):
    pass


class DimensionOverflowError(IdxFormatError):
    pass


class DatasetError(NevaeError):
    pass


class CheckpointError(NevaeError):
    pass


class NonFiniteLossError(NevaeError):
    def __init__(self, message: str, **context):
        self.context = context
        details = ", ".join(f"{key}={value}" for key, value in context.items())
        super().__init__(f"{message} [{details}]" if details else message)


class TraverseError(NevaeError):
    pass


class IncompatibleModelsError(NevaeError):
    pass


class ConfigError(NevaeError):
    pass
