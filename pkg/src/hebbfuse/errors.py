"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericalError -> 4. Rough division of labour: ConfigError means the
request itself is invalid (bad hyperparameter, unknown layer name),
DataError means stored data is corrupt or inconsistent, NumericalError
means a computation left the realm of finite, well-posed arithmetic
(divergent iteration, non-PSD covariance, singular system).
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ToolkitError):
    """Invalid configuration or infeasible request."""


class DataError(ToolkitError):
    """Corrupt, inconsistent, or missing stored data."""


class NumericalError(ToolkitError):
    """Numerical failure: divergence, loss of finiteness, ill-posed system."""
