"""Exception hierarchy shared by all modules."""


class IsoperiError(Exception):
    """Base class for every error raised by the package."""


class DomainError(IsoperiError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedOrderError(IsoperiError, ValueError):
    """A derivative order beyond the profile's smoothness was requested."""


class InfeasibleConstructionError(IsoperiError, ValueError):
    """Parameters of a counterexample construction violate a precondition.

    The ``inequality`` attribute names the violated condition.
    """

    def __init__(self, inequality, message=None):
        self.inequality = inequality
        super().__init__(message or f"construction infeasible: {inequality}")


class PositivityError(IsoperiError, ValueError):
    """A weight that must stay positive does not."""


class QuadratureError(IsoperiError, ArithmeticError):
    """An integral did not reach the requested accuracy."""

    def __init__(self, message, estimate=None, error=None):
        self.estimate = estimate
        self.error = error
        super().__init__(message)


class OutOfRangeError(IsoperiError, ValueError):
    """A volume or radius exceeds the range covered by a table or bracket."""


class SingularInputError(IsoperiError, ValueError):
    """The operation is singular at the requested point (e.g. r = 0)."""


class DimensionError(IsoperiError, ValueError):
    """The operation does not support the requested dimension."""


class PreconditionError(IsoperiError, ValueError):
    """A documented precondition of the operation does not hold."""


class IntegrationError(IsoperiError, RuntimeError):
    """The ODE integrator failed; ``partial`` holds what was computed."""

    def __init__(self, message, partial=None):
        self.partial = partial
        super().__init__(message)


class StateError(IsoperiError, RuntimeError):
    """An object is in the wrong state for the requested operation."""


class EmbeddingError(IsoperiError, ValueError):
    """A graph over the sphere is not embedded (sup |u| >= 1)."""


class CorrectionError(IsoperiError, RuntimeError):
    """Volume correction by a constant shift failed."""


class ResolutionError(IsoperiError, ValueError):
    """The quadrature grid cannot resolve the requested band."""


class InfeasibleMassError(IsoperiError, ValueError):
    """No sublevel set carries the same mass as the given subset."""


class ConfigError(IsoperiError, ValueError):
    """An experiment configuration is invalid."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))
