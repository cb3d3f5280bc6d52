"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An input is structurally malformed (non-finite components, inconsistent
    parameters)."""


class DomainError(ValueError):
    """A value lies outside the mathematical domain of an operation
    (nonpositive fiber size, negative area, ...)."""


class SingularTimeError(DomainError):
    """A closed-form solution was evaluated at or beyond its blow-up time."""

    def __init__(self, message: str, t_star: float):
        super().__init__(message)
        self.t_star = t_star


class ChartDomainError(DomainError):
    """A coordinate computation left its chart."""


class NumericalError(RuntimeError):
    """A numerical subroutine cannot produce a trustworthy result
    (ill-conditioned metric inversion, ...)."""


class IntegrationFailure(RuntimeError):
    """Adaptive integration could not continue (step-size underflow).

    Carries the partial trajectory accumulated before the failure in the
    ``trajectory`` attribute.
    """

    def __init__(self, message: str, trajectory):
        super().__init__(message)
        self.trajectory = trajectory
