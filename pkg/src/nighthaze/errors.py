"""Exception types shared across the package.

The CLI maps each family onto its own exit code, so library code raises
the most specific class that applies.
"""


class NighthazeError(Exception):
    """Base class for package errors."""


class ConfigError(NighthazeError, ValueError):
    """Unknown configuration key or out-of-range value."""

    def __init__(self, message, keys=()):
        super().__init__(message)
        self.keys = tuple(keys)


class DimensionError(NighthazeError, ValueError):
    """Inputs whose shapes or channel counts do not agree."""


class ImageIOError(NighthazeError, OSError):
    """An image file could not be read, decoded or written."""
