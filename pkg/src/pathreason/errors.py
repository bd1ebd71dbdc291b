"""Exception types shared across the package."""


class PathReasonError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PathReasonError):
    """A text input file violates its line format."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class FormatError(PathReasonError):
    """A binary file violates its declared format."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ConfigError(PathReasonError):
    """A configuration value or template is missing or inconsistent."""


class SamplingError(PathReasonError):
    """Negative sampling could not produce a valid corrupted triple."""


class MissingEmbeddingError(PathReasonError):
    """A statement key was not found in the embedding store (strict mode)."""

    def __init__(self, key: int):
        super().__init__(f"no embedding stored for statement key 0x{key:016x}")
        self.key = key
