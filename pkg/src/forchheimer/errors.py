"""Exception hierarchy shared by all modules."""


class ForchheimerError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(ForchheimerError, ValueError):
    """An argument is outside its admissible range."""


class DomainError(ParameterError):
    """A function was evaluated outside its domain (e.g. negative argument)."""


class RootFindingError(ForchheimerError, RuntimeError):
    """A scalar root solve did not converge.

    ``bracket`` holds the best enclosing interval found so far.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class ExponentConditionError(ParameterError):
    """An exponent precondition of an estimate is violated.

    ``condition`` names the failing inequality, e.g. ``"alpha > n*mu0"``.
    """

    def __init__(self, condition, message=None):
        super().__init__(message or f"exponent condition violated: {condition}")
        self.condition = condition


class SubcriticalError(ExponentConditionError):
    """The estimate machinery only covers the super-critical regime a > delta."""


class ScheduleError(ExponentConditionError):
    """The initial exponent of a Moser schedule is below its threshold."""


class TruncationError(ForchheimerError, RuntimeError):
    """An infinite product/series tail could not be certified below tolerance."""


class ConfigurationError(ForchheimerError, ValueError):
    """A configuration document or a required constant is missing/invalid."""


class SolverFailure(ForchheimerError, RuntimeError):
    """Time integration failed (step size fell below ``dt_min``)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
