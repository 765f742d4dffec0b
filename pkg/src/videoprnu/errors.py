"""Exception types shared across the toolkit."""


class VideoPrnuError(Exception):
    """Base class for all toolkit errors."""


class FormatError(VideoPrnuError):
    """A file or bitstream does not conform to its declared format."""


class TruncationError(FormatError):
    """A payload ended before the declared amount of data was read."""


class DimensionError(VideoPrnuError):
    """Plane or video dimensions are invalid or inconsistent."""


class ConfigError(VideoPrnuError):
    """An operation was configured with invalid parameters."""


class CoverageError(VideoPrnuError):
    """Macroblock metadata does not tile the frame it describes."""


class StoreError(VideoPrnuError):
    """Base class for fingerprint store errors."""


class DuplicateCameraError(StoreError):
    """A fingerprint with this camera id is already stored."""


class UnknownCameraError(StoreError):
    """No fingerprint with this camera id exists in the store."""
