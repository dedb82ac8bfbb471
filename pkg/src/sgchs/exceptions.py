"""Exception hierarchy.

``InputError`` subclasses map to CLI exit status 1, ``NumericalError``
subclasses to exit status 2.
"""


class SGCHSError(Exception):
    """Base class for all package errors."""


class InputError(SGCHSError, ValueError):
    """Malformed or unusable input data or arguments."""


class NumericalError(SGCHSError, ArithmeticError):
    """A numerical procedure failed or a parameter left its admissible set."""


class FeasibilityError(NumericalError, ValueError):
    """A kurtosis parameter lies outside the range where the expansion is a density."""

    def __init__(self, family, beta, lower, upper):
        self.family = family
        self.beta = beta
        self.lower = lower
        self.upper = upper
        super().__init__(
            f"beta={beta!r} is infeasible for the {family} expansion; "
            f"it must lie in [{lower}, {upper}]"
        )


class ConstraintViolationError(NumericalError, ValueError):
    """A between-squares correlation lies outside its positivity bounds."""

    def __init__(self, pair, gamma, lower, upper):
        self.pair = pair
        self.gamma = gamma
        self.lower = lower
        self.upper = upper
        super().__init__(
            f"gamma={gamma!r} for margin pair {pair} violates the positivity "
            f"bounds [{lower!r}, {upper!r}]"
        )


class UnsupportedDimensionError(NumericalError):
    """The quadrature route does not support this many margins."""


class ConvergenceError(NumericalError):
    """An optimizer or root finder did not converge."""

    def __init__(self, message, index=None):
        self.index = index
        if index is not None:
            message = f"{message} (leave-one-out index {index})"
        super().__init__(message)


class NoExceedanceError(NumericalError):
    """A statistic needing at least one VaR exceedance saw none."""
