"""Gram-Charlier-like expansions of hyperbolic-secant laws for portfolio sums:
densities, a between-squares copula, estimation, VaR/ES and backtests."""

from . import backtest, copula, distcore, estimation, risk
from .distcore import Family, MarginSpec, SumSpec, density, sample
from .estimation import FitReport, GCSumEstimator, ReturnPanel, Standardizer, estimate_mom, ifm_fit
from .exceptions import (
    ConstraintViolationError, ConvergenceError, FeasibilityError, InputError,
    NoExceedanceError, NumericalError, SGCHSError, UnsupportedDimensionError,
)
from .risk import Law, model_es, model_var

__version__ = "0.1.0"

__all__ = [
    "ConstraintViolationError", "ConvergenceError", "FeasibilityError", "FitReport", "Family",
    "GCSumEstimator", "InputError", "Law", "MarginSpec", "NoExceedanceError", "NumericalError",
    "ReturnPanel", "SGCHSError", "Standardizer", "SumSpec", "UnsupportedDimensionError",
    "backtest", "copula", "density", "distcore", "estimate_mom", "estimation", "ifm_fit",
    "model_es", "model_var", "risk", "sample",
]
