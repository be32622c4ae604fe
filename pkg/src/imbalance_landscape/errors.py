"""Exception types shared across the package."""


class LandscapeError(Exception):
    """Base class for all package errors."""


class DomainError(LandscapeError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InputError(LandscapeError, ValueError):
    """Malformed input: bad grid, mismatched lengths, wrong dimension."""


class UnfitError(LandscapeError):
    """A model cannot be fitted on the supplied data (e.g. a single class)."""


class NumericError(LandscapeError, ArithmeticError):
    """A numerical routine failed (singular matrix, non-convergence)."""
