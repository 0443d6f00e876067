"""Exception types shared across the package.

The CLI maps ``ValidationError`` subclasses to exit code 1 and
``NumericalError`` subclasses to exit code 2.
"""


class ValidationError(ValueError):
    """Inputs violate a precondition (bad parameters, wrong regime, ...)."""


class ConditionError(ValidationError):
    """A named parameter inequality required by an operation does not hold."""

    def __init__(self, message, violated=()):
        super().__init__(message)
        self.violated = tuple(violated)


class RegimeError(ValidationError):
    """Operation only defined in a different spreading regime."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to produce a trustworthy answer."""


class ConvergenceError(NumericalError):
    pass


class BracketError(NumericalError):
    """Minimiser scan found its minimum on the boundary of the search range."""


class BlowUpError(NumericalError):
    def __init__(self, message, t):
        super().__init__(message)
        self.t = t
