"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1 (usage/config),
ValidationError -> 2 (data/validation), anything else -> 3 (internal).
"""


class CostForestError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CostForestError):
    """Invalid configuration: bad keys, out-of-range hyperparameters, bad flags."""


class ValidationError(CostForestError):
    """Invalid data: malformed files, broken invariants, degenerate inputs."""
