"""Standard normal density, distribution function and quantile.

Scalars in, floats out; arrays in, arrays of the same shape out.
"""

import math

import numpy as np

from .errors import DomainError
from .kernels import CDF_SATURATION, normal_cdf_array

__all__ = ["normal_cdf", "normal_pdf", "normal_quantile"]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation for the inverse normal CDF (rel. err ~1e-9),
# refined below with one Halley step on the exact CDF.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _check_finite(z):
    if not np.all(np.isfinite(z)):
        raise DomainError("normal functions require finite arguments")


def _cdf_scalar(z):
    if z < -CDF_SATURATION:
        return 0.0
    if z > CDF_SATURATION:
        return 1.0
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def normal_cdf(z):
    """Standard normal CDF, accurate to ~1e-16 absolute.

    Saturates to exactly 0 or 1 for ``|z| > 38``.
    """
    if np.ndim(z) == 0:
        z = float(z)
        _check_finite(z)
        return _cdf_scalar(z)
    arr = np.asarray(z, dtype=np.float64)
    _check_finite(arr)
    return normal_cdf_array(arr.ravel()).reshape(arr.shape)


def normal_pdf(z):
    """Standard normal density ``exp(-z**2/2) / sqrt(2*pi)``."""
    if np.ndim(z) == 0:
        z = float(z)
        _check_finite(z)
        return _INV_SQRT_2PI * math.exp(-0.5 * z * z)
    arr = np.asarray(z, dtype=np.float64)
    _check_finite(arr)
    return _INV_SQRT_2PI * np.exp(-0.5 * arr * arr)


def _quantile_lower(p):
    # p in (0, 0.5]
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    else:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    e = _cdf_scalar(x) - p
    u = e * _SQRT_2PI * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def _quantile_scalar(p):
    if not (0.0 < p < 1.0) or math.isnan(p):
        raise DomainError(f"normal_quantile requires 0 < p < 1, got {p!r}")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return _quantile_lower(p)
    return -_quantile_lower(1.0 - p)


def normal_quantile(p):
    """Inverse of :func:`normal_cdf` on the open unit interval."""
    if np.ndim(p) == 0:
        return _quantile_scalar(float(p))
    arr = np.asarray(p, dtype=np.float64)
    return np.array([_quantile_scalar(v) for v in arr.ravel()]).reshape(arr.shape)
