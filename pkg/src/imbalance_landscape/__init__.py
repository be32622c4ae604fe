"""Bayes landscape of class imbalance over the (eta, kappa, delta) triplet."""

from ._accel import HAS_NUMBA
from .errors import DomainError, InputError, LandscapeError, NumericError, UnfitError
from .specfun import normal_cdf, normal_pdf, normal_quantile

__version__ = "0.1.0"

__all__ = [
    "HAS_NUMBA",
    "DomainError",
    "InputError",
    "LandscapeError",
    "NumericError",
    "UnfitError",
    "normal_cdf",
    "normal_pdf",
    "normal_quantile",
]
