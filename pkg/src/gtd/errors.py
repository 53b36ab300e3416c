"""Exception hierarchy shared by all gtd modules."""


class GTDError(Exception):
    """Base class for every error raised by gtd."""


class DomainError(GTDError, ValueError):
    """A point lies outside the declared domain of a field or system."""


class NonFiniteError(GTDError, ArithmeticError):
    """A value or derivative evaluated to NaN or infinity."""


class ParamError(GTDError, ValueError):
    """Invalid parameters for a catalog system or metric specification."""


class MissingDegreeError(GTDError, ValueError):
    """Euler's identity was requested for a potential without a homogeneity degree."""


class SingularProductError(GTDError, ZeroDivisionError):
    """Some product E^a I^a vanishes while the metric exponent 2k+1 is negative."""


class DegenerateMetricError(GTDError, ArithmeticError):
    """A metric has vanishing determinant at the requested point."""


class SignChangeError(GTDError, ValueError):
    """det g changes sign over a quadrature region."""


class NoConvergenceError(GTDError, RuntimeError):
    """An iterative solver did not reach its tolerance."""


class ConfigError(GTDError, ValueError):
    """A run configuration is malformed or contains unknown keys."""
