"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when a matrix, dataset, or file violates a structural invariant."""


class NonConvergenceError(RuntimeError):
    """Raised when an iterative solver exhausts its iteration budget.

    The last iterate is attached so callers can inspect how close the
    solver got.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class TrainingDiverged(RuntimeError):
    """Raised when the training loss becomes non-finite.

    Carries the per-epoch history recorded up to the failing epoch as a
    diagnostic record.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history
