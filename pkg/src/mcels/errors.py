"""Exception hierarchy shared across the package."""


class McelsError(Exception):
    """Base class for all errors raised by this package."""


class DataError(McelsError):
    """Malformed or inconsistent input data (files, shapes, labels)."""


class CheckpointError(DataError):
    """Unreadable, truncated or version-mismatched classifier checkpoint."""


class NoNeighborError(McelsError):
    """The background set contains no instance of the requested class."""


class NumericError(McelsError):
    """A non-finite value appeared where the computation requires finite ones."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
