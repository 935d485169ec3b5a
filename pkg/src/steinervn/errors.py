"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(ValueError):
    """A structured input (block list, sign vector, file) is malformed."""


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations.

    Carries the best value seen so far and the last residual, so callers can
    decide whether the partial answer is usable.
    """

    def __init__(self, message, best_value=None, residual=None):
        super().__init__(message)
        self.best_value = best_value
        self.residual = residual
