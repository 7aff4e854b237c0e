"""Error taxonomy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
anything else -> 3.
"""


class ConfigError(ValueError):
    """Invalid parameters, flags, or config-file contents."""


class DataError(ValueError):
    """Unreadable, malformed, or contract-violating dataset content."""
