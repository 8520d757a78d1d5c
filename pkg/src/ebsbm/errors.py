"""Shared exception types."""


class DataError(ValueError):
    """Malformed or inconsistent input data (files, labels, counts)."""


class DegeneratePartitionError(ValueError):
    """A partition contains an empty cluster."""


class NumericalError(RuntimeError):
    """A numerical routine produced a non-finite value."""
