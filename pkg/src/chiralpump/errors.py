"""Exception hierarchy shared by the library and the CLI."""


class ChiralPumpError(Exception):
    """Base class for all errors raised by chiralpump."""


class InvalidArgumentError(ChiralPumpError, ValueError):
    pass


class EliminationUndefinedError(ChiralPumpError, ZeroDivisionError):
    """Raised when a quantity needs 1/Delta (or 1/eta) and that value is zero."""


class UndefinedObservableError(ChiralPumpError, ValueError):
    pass


class IntegrationError(ChiralPumpError, RuntimeError):
    """A state invariant was violated during time integration."""

    def __init__(self, message, time=None, magnitude=None):
        super().__init__(message)
        self.time = time
        self.magnitude = magnitude


class SteadyStateTimeout(IntegrationError):
    pass


class DegenerateSteadyStateError(ChiralPumpError):
    def __init__(self, dimension):
        super().__init__(
            f"Liouvillian kernel has dimension {dimension}; no unique steady state"
        )
        self.dimension = dimension
