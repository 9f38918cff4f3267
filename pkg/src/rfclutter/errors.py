"""Exception types shared across the simulator."""


class ConfigurationError(ValueError):
    """Invalid configuration: bad file contents, mismatched dimensions,
    or parameter values outside their documented range."""


class ConditioningError(ArithmeticError):
    """A numerical solve cannot proceed, e.g. a matrix that must be
    positive definite is singular or indefinite."""
