"""Exception hierarchy.

Configuration problems derive from :class:`ValueError`; numerical failures
derive from :class:`ArithmeticError`. The CLI maps the first group to exit
code 2 and the second to exit code 3.
"""


class ObjBayesError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ObjBayesError, ValueError):
    """Invalid family name, hyperparameter, prior label or argument."""


class DomainError(ConfigError):
    """A parameter point lies on or outside the boundary of its space."""


class OutOfScopeError(ConfigError):
    """The requested analysis is deliberately not supported."""


class ImproperPriorError(ConfigError):
    """A proper prior was required but the supplied one does not normalize."""


class NumericalError(ObjBayesError, ArithmeticError):
    """Quadrature or optimisation failed to produce a trustworthy value."""

    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class ImproperPosteriorError(NumericalError):
    """The posterior could not be normalized."""

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic
