"""Exception types raised across the package."""


class DomainError(ValueError):
    """Input lies outside the mathematical domain of an operation."""


class TargetRangeError(DomainError):
    """A sampled target was evaluated outside its tabulated time range."""


class IntegrationError(RuntimeError):
    """The adaptive integrator failed to advance.

    Carries the time at which the step size underflowed.
    """

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class ConfigError(ValueError):
    """A scenario configuration could not be parsed or validated."""
