"""Exception hierarchy shared by the numerical modules and the CLI."""


class DiabaticError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(DiabaticError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateTrajectoryError(DomainError):
    """Trajectory of zero length (impact parameter b >= 1)."""


class NumericalError(DiabaticError, ArithmeticError):
    """A numerical procedure failed to reach its requested accuracy.

    Attributes:
        achieved: best accuracy estimate reached before giving up, if known.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class IntegrationError(NumericalError):
    """The ODE integrator exhausted its step budget.

    Attributes:
        partial: the partially propagated state (and diagnostics) at the
            point where integration stopped.
    """

    def __init__(self, message, partial=None, achieved=None):
        super().__init__(message, achieved=achieved)
        self.partial = partial


class AccuracyError(NumericalError):
    """Norm drift along the path exceeded the configured bound."""


class ScalingFitError(NumericalError):
    """A power-law fit of gate error against perturbation size is unreliable."""


class UnknownGateError(DiabaticError, KeyError):
    """The requested gate name is not registered."""
