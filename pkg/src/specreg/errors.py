"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition."""


class NearDefectiveError(RuntimeError):
    """Eigendecomposition refused: the matrix is numerically defective.

    This is a signal, not a crash. ``gap`` carries the offending eigenvalue
    distance (or the reconstruction residual when that is what failed).
    """

    def __init__(self, message, gap):
        super().__init__(message)
        self.gap = float(gap)


class MatrixFormatError(ValueError):
    """A matrix file failed to parse. ``line`` is 1-based."""

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = int(line)


class ResolutionError(ValueError):
    """The evaluation grid is too coarse (or would be too large) for the
    requested epsilon; refine the region resolution or raise epsilon."""


class FunctionEvaluationError(ValueError):
    """A scalar function handle returned a non-finite value at an eigenvalue."""

    def __init__(self, message, eigenvalue):
        super().__init__(message)
        self.eigenvalue = complex(eigenvalue)
