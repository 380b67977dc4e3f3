"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration document is malformed; the message carries the key path."""


class EstimationError(RuntimeError):
    """An estimate was requested from data that cannot support it."""


class QuadratureError(RuntimeError):
    """Numerical integration failed to reach the requested tolerance."""
