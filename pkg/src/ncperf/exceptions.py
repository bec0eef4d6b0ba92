"""Exception types raised across the package."""


class NCPerfError(Exception):
    """Base class for all package errors."""


class ConfigError(NCPerfError, ValueError):
    """Invalid user-supplied configuration."""


class NumericalError(NCPerfError, ArithmeticError):
    """A numerical routine could not produce a meaningful result."""


class ShapeMismatch(NCPerfError, ValueError):
    pass


class SingularMatrix(NumericalError):
    pass


class NotColumnStochastic(ConfigError):
    pass


class InvalidSigma(ConfigError):
    pass


class NonPositiveDenominator(NumericalError):
    """Raised when a ratio-of-linear measure has ``<B, C> <= 0``.

    ``step`` is set when the failure happens inside an iterative solver.
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class EmptySample(ConfigError):
    pass


class DegenerateLabels(ConfigError):
    pass


class ParseError(ConfigError):
    pass


class MissingLabelColumn(ConfigError):
    pass


class EmptyResults(ConfigError):
    pass
