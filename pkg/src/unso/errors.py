"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operand dimensions are incompatible with the requested operation."""


class ParseError(ValueError):
    """A matrix, coefficient, or schedule file is malformed."""


class DegenerateInputError(ValueError):
    """The input matrix is unusable (e.g. identically zero)."""


class OracleConvergenceError(RuntimeError):
    """The SVD verification oracle failed to converge within its sweep budget."""


class TrainingDivergedError(RuntimeError):
    """Training produced a non-finite loss; carries the last finite state."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
