"""Exception types shared across the package."""


class SgevalError(Exception):
    """Base class for errors raised by this package."""


class DataError(SgevalError):
    """Invalid or inconsistent input data: schema violations, broken
    invariants, missing embedding keys, mismatched documents."""
