"""Exception hierarchy shared by all pixelbench modules.

Every error carries a short machine-readable ``code`` so the CLI and the
HTTP service can surface failures uniformly.
"""


class PixelbenchError(Exception):
    """Base class for all pixelbench errors."""

    code = "error"


class FormatError(PixelbenchError):
    """A binary input file does not match its declared layout."""

    code = "format"

    def __init__(self, message, path=None, offset=None):
        self.path = path
        self.offset = offset
        detail = message
        if path is not None:
            detail = f"{path}: {detail}"
        if offset is not None:
            detail = f"{detail} (at byte offset {offset})"
        super().__init__(detail)


class ConsistencyError(PixelbenchError):
    """Two inputs that must agree (e.g. image/label counts) do not."""

    code = "consistency"


class EmptyDataError(PixelbenchError):
    """An operation that needs at least one sample received none."""

    code = "empty-data"


class InsufficientDataError(PixelbenchError):
    """Fewer samples than the requested model size supports."""

    code = "insufficient-data"


class DegenerateDataError(PixelbenchError):
    """Input data has no variance to decompose."""

    code = "degenerate-data"


class DimensionError(PixelbenchError):
    """A vector or image does not match the expected shape."""

    code = "dimension"


class ConfigError(PixelbenchError):
    """An attack or model configuration violates its invariants."""

    code = "config"


class BoundsError(PixelbenchError):
    """A pixel coordinate or value lies outside its allowed range."""

    code = "bounds"


class IntegrityError(PixelbenchError):
    """A session file is truncated or fails its checksums."""

    code = "integrity"


class VersionError(PixelbenchError):
    """A session file was written by an incompatible schema version."""

    code = "version"
