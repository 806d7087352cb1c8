"""Exception types shared across the package."""


class DegenerateBasisError(ValueError):
    """Basis functions are numerically rank-deficient on the grid."""


class EmptyDictionaryError(ValueError):
    """Dictionary construction produced no usable atoms."""


class ConvergenceFailure(RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance.

    Carries the best iterate found so far in ``coefficients`` / ``residual``
    so callers can keep partial results.
    """

    def __init__(self, message, coefficients=None, residual=None):
        super().__init__(message)
        self.coefficients = coefficients
        self.residual = residual
