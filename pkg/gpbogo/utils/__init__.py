from .errors import (
    BasisTooLargeError,
    BracketError,
    ConvergenceError,
    ConvergenceWarning,
    DilutenessWarning,
    GPBogoError,
    IntegrationError,
    NegativeFourierWarning,
    NumericalError,
    PreconditionError,
    QuadratureError,
    SeriesDivergenceWarning,
)
from .logging_config import configure_logging, get_logger
