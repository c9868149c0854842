"""Exception types shared across the toolkit."""


class QuadratureError(RuntimeError):
    """A quadrature failed to converge within its budget.

    Carries the best value and error estimate reached so callers can decide
    whether to proceed with a degraded result.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class ConfigError(ValueError):
    """Invalid run configuration (unknown key, bad value, missing field)."""
