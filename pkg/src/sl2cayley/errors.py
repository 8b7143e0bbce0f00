"""Exception types shared across the package, with CLI exit codes."""

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ANALYSIS = 3
EXIT_CAP = 4


class CapExceededError(RuntimeError):
    """An enumeration or search exceeded its configured size cap."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""


class ConfigError(ValueError):
    """An experiment configuration is malformed or violates a precondition."""
