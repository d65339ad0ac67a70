"""
Exception and warning types raised across the package.

Precondition violations map to exit status 2 on the command line and numerical
failures to exit status 3.
"""


class GPBogoError(Exception):
    exit_code = 1


class PreconditionError(GPBogoError, ValueError):
    exit_code = 2


class BasisTooLargeError(PreconditionError):
    def __init__(self, dimension, limit):
        self.dimension = dimension
        self.limit = limit
        super().__init__(
            f"Fock basis dimension {dimension} exceeds the limit {limit}."
        )


class NumericalError(GPBogoError, RuntimeError):
    exit_code = 3


class QuadratureError(NumericalError):
    def __init__(self, message, interval=None):
        self.interval = interval
        if interval is not None:
            message = f"{message} on [{interval[0]:.6g}, {interval[1]:.6g}]"
        super().__init__(message)


class IntegrationError(NumericalError):
    def __init__(self, message, radius=None):
        self.radius = radius
        if radius is not None:
            message = f"{message} (at r={radius:.6g})"
        super().__init__(message)


class BracketError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class ConvergenceWarning(RuntimeWarning):
    pass


class SeriesDivergenceWarning(RuntimeWarning):
    pass


class DilutenessWarning(UserWarning):
    pass


class NegativeFourierWarning(UserWarning):
    pass
