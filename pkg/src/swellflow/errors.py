"""Exception hierarchy.

``DomainError`` and ``SolverError`` map to CLI exit code 1,
``ConfigError`` and ``PreconditionError`` raised from argument handling map to 2.
"""


class SwellflowError(Exception):
    pass


class DomainError(SwellflowError, ValueError):
    """Input outside the admissible set (negative activity, eps > 1, ...)."""


class EvaluationError(DomainError):
    """A constitutive evaluation produced a non-finite value."""


class PreconditionError(SwellflowError, ValueError):
    """An operation was called with inputs it does not apply to."""


class SolverError(SwellflowError, RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = list(residuals or [])


class ConfigError(SwellflowError, ValueError):
    pass
