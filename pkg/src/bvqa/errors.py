"""Exception types shared across the library."""


class BvqaError(Exception):
    """Base class for all library errors."""


class ParseError(BvqaError):
    """Malformed container header or stream syntax."""


class TruncatedError(BvqaError):
    """Stream ended mid-payload; carries the index of the failing frame."""

    def __init__(self, message, frame_index=None):
        super().__init__(message)
        self.frame_index = frame_index


class ManifestError(BvqaError):
    """Bad dataset manifest row; carries the 1-based data row number."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class TooShortError(BvqaError):
    """Clip has fewer frames than one sub-video."""


class ShapeError(BvqaError):
    """Input dimensions violate an operation's geometry contract."""


class FitError(BvqaError):
    """Not enough, or degenerate, data to fit a transform."""


class StateError(BvqaError):
    """Operation requires a fitted pipeline."""


class InputError(BvqaError):
    """Input is missing required planes or fields."""


class ConfigError(BvqaError):
    """Invalid configuration value or combination."""


class DegenerateError(BvqaError):
    """Statistic undefined for the given input (e.g. constant scores)."""


class FormatError(BvqaError):
    """Corrupt or incompatible serialized model container."""

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class VersionError(FormatError):
    """Serialized model written by an incompatible format version."""
