"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
NumericError -> 3.
"""


class ConfigError(Exception):
    """Invalid configuration value or command-line usage."""


class DataError(Exception):
    """Malformed or unusable input data (CSV rows, labels, schemas)."""


class NumericError(Exception):
    """Numeric failure: non-finite values, failed gradient check."""
