"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage/configuration problems exit 1,
data problems exit 2, anything unexpected exits 3.
"""


class EvoSelectError(Exception):
    """Base class for all package errors."""


class UsageError(EvoSelectError):
    """An API or CLI call violated a precondition."""


class ConfigurationError(UsageError):
    """Invalid optimizer, experiment, or classifier configuration."""


class DataError(EvoSelectError):
    """Input data cannot be turned into a usable dataset."""


class ParseError(DataError):
    """Malformed CSV content (ragged rows, unreadable file)."""


class SchemaError(DataError):
    """Header or column contents disagree with the expected layout."""


class StratificationError(DataError):
    """A class has too few rows for a stratified operation."""
