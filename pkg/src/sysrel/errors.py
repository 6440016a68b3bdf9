"""Exception types shared across the package.

The CLI maps these onto exit codes (usage 1, data 2, numeric 3), so raise
the most specific type that applies.
"""


class SysrelError(Exception):
    """Base class for all package errors."""


class UsageError(SysrelError):
    """Bad command-line flags or flag combinations."""


class DataError(SysrelError, ValueError):
    """Malformed, inconsistent, or insufficient input data."""


class StructureError(DataError):
    """Invalid structure expression or structure/data mismatch."""


class NumericError(SysrelError, RuntimeError):
    """A numeric procedure failed to produce a usable result."""
