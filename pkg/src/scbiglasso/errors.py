"""Exception and warning types shared across the package."""


class ScbiglassoError(Exception):
    """Base class for all package errors."""


class DimensionError(ScbiglassoError, ValueError):
    """Shapes disagree, or a size guard was exceeded."""


class NotPositiveDefiniteError(ScbiglassoError, ArithmeticError):
    """A Kronecker-sum precision is not positive definite.

    ``index`` holds the offending eigenvalue pair ``(i, j)`` when known;
    ``iteration`` and ``column`` locate the failure inside a solver run.
    """

    def __init__(self, message, index=None, iteration=None, column=None):
        super().__init__(message)
        self.index = index
        self.iteration = iteration
        self.column = column


class EigenConvergenceError(ScbiglassoError, ArithmeticError):
    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class DataFormatError(ScbiglassoError, ValueError):
    """Malformed input file or data stack."""


class LassoConvergenceWarning(RuntimeWarning):
    pass


class ConstantVectorWarning(RuntimeWarning):
    """A rank vector had zero variance; the correlation was set to 0."""
