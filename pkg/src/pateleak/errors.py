"""Exception types shared across the package.

The CLI maps each class to a process exit code, so keep the hierarchy flat.
"""


class InvalidInputError(ValueError):
    """Arguments violate an operation's preconditions."""


class AccuracyError(ArithmeticError):
    """A numerical routine could not reach the requested tolerance.

    Attributes
    ----------
    achieved : float
        Best error estimate reached before giving up.
    """

    def __init__(self, message, achieved=float("nan")):
        super().__init__(message)
        self.achieved = achieved


class ResourceError(RuntimeError):
    """Requested work exceeds a configured cap."""


class NoSolutionError(ArithmeticError):
    """A root-finding target cannot be bracketed."""


class ConsistencyError(RuntimeError):
    """An internal assumption (e.g. monotonicity) was observed to fail."""
