"""Exception types shared across the package."""


class LubsimError(Exception):
    """Base class."""


class DomainError(LubsimError, ValueError):
    """Evaluation outside the domain where a quantity is defined."""


class SurfaceError(LubsimError, ValueError):
    """Invalid surface parameters (for example a closing film)."""


class SolverError(LubsimError, RuntimeError):
    """Reference solver did not converge."""


class TrainingDivergence(LubsimError, FloatingPointError):
    """Non-finite loss or gradient during training."""


class ConfigError(LubsimError, ValueError):
    """Malformed or unknown configuration entries."""
