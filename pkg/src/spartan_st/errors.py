"""Exception hierarchy shared by every module of the package."""


class SSRFError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class InvalidParameterError(SSRFError, ValueError):
    """A model or numerical parameter is out of its admissible range."""

    exit_code = 2

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class WrongMethodError(InvalidParameterError):
    """A closed-form method was requested outside the configuration it covers."""


class DomainError(SSRFError, ValueError):
    """A special function was called outside its supported argument range."""

    exit_code = 2


class SingularityError(SSRFError, ArithmeticError):
    """The requested quantity is infinite (e.g. zero-lag variance for d=3, mu=0)."""

    exit_code = 3


class AccuracyError(SSRFError, ArithmeticError):
    """A series or quadrature failed to reach its tolerance.

    The best available estimate is kept in ``partial``.
    """

    exit_code = 4

    def __init__(self, message, partial=None, est_error=None):
        super().__init__(message)
        self.partial = partial
        self.est_error = est_error


class EstimationError(SSRFError, ValueError):
    """An empirical estimator was asked for lags the sample cannot support."""

    exit_code = 2
