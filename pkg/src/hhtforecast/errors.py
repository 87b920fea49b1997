"""Error types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1 (usage),
DataError -> 2 (data), ConvergenceError -> 3 (compute).
"""


class ConfigError(ValueError):
    """Bad configuration: unknown keys, schema violations, invalid values."""


class DataError(ValueError):
    """Bad input data: malformed files, non-uniform sampling, degenerate series."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance within its budget."""
