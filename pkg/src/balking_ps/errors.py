"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain where a function is defined."""


class ConvergenceError(ArithmeticError):
    """A series or quadrature did not reach its target accuracy.

    The best available estimate is kept on ``partial`` so callers can still
    inspect it.
    """

    def __init__(self, message, partial=None, err_est=None):
        super().__init__(message)
        self.partial = partial
        self.err_est = err_est


class TruncationError(ArithmeticError):
    """Result changed when the state-space truncation was doubled."""

    def __init__(self, message, n_max, n_max_doubled, discrepancy):
        super().__init__(message)
        self.n_max = n_max
        self.n_max_doubled = n_max_doubled
        self.discrepancy = discrepancy
