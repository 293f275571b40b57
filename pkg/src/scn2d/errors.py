"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Operand shapes do not agree."""


class NumericError(ValueError):
    """Non-finite values where finite ones are required."""


class DegenerateNodeError(ValueError):
    """Candidate hidden output is (numerically) the zero vector."""


class DegenerateNormalizationError(ValueError):
    """Every value to normalize is zero."""


class FormatError(ValueError):
    """Malformed on-disk data (IDX, CSV, model files)."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ParseError(FormatError):
    """Model stream could not be parsed."""


class VersionError(FormatError):
    """Model stream carries an unsupported schema version."""


class ConsistencyError(ValueError):
    """Paired inputs disagree (e.g. image and label counts)."""
