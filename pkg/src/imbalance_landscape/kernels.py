"""Hot numeric kernels with a numba path and a pure-numpy path.

Each public kernel dispatches on :data:`HAS_NUMBA`. Both implementations are
kept importable so tests and ``benchmarks/bench_kernels.py`` can compare them
directly.
"""

import math

import numpy as np

from ._accel import HAS_NUMBA, njit

# Beyond this |z| the normal tail is below the smallest normal double, so the
# CDF is clamped to exactly 0 or 1.
CDF_SATURATION = 38.0

_SQRT2 = math.sqrt(2.0)


# --- normal CDF over arrays -------------------------------------------------

def _normal_cdf_numpy(z):
    z = np.asarray(z, dtype=np.float64)
    out = 0.5 * _erfc_vec(-z / _SQRT2)
    out[z < -CDF_SATURATION] = 0.0
    out[z > CDF_SATURATION] = 1.0
    return out


_erfc_vec = np.vectorize(math.erfc, otypes=[np.float64])


@njit
def _normal_cdf_numba(z):
    out = np.empty(z.shape[0], dtype=np.float64)
    for i in range(z.shape[0]):
        zi = z[i]
        if zi < -CDF_SATURATION:
            out[i] = 0.0
        elif zi > CDF_SATURATION:
            out[i] = 1.0
        else:
            out[i] = 0.5 * math.erfc(-zi / _SQRT2)
    return out


# --- threshold counting for Monte Carlo ------------------------------------

def _count_at_or_above_numpy(x, threshold):
    return int(np.count_nonzero(x >= threshold))


@njit
def _count_at_or_above_numba(x, threshold):
    c = 0
    for i in range(x.shape[0]):
        if x[i] >= threshold:
            c += 1
    return c


# --- k-nearest-neighbour minority vote -------------------------------------

def _knn_minority_fraction_numpy(train_x, train_minority, test_x, k, chunk=256):
    n_test = test_x.shape[0]
    out = np.empty(n_test, dtype=np.float64)
    for start in range(0, n_test, chunk):
        block = test_x[start:start + chunk]
        diff = block[:, None, :] - train_x[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        # stable sort: equal distances resolve to the lower training index
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        out[start:start + chunk] = train_minority[nearest].sum(axis=1) / k
    return out


@njit
def _knn_minority_fraction_numba(train_x, train_minority, test_x, k):
    n_test = test_x.shape[0]
    n_train, p = train_x.shape
    out = np.empty(n_test, dtype=np.float64)
    d2 = np.empty(n_train, dtype=np.float64)
    for i in range(n_test):
        for j in range(n_train):
            s = 0.0
            for c in range(p):
                t = test_x[i, c] - train_x[j, c]
                s += t * t
            d2[j] = s
        order = np.argsort(d2, kind="mergesort")
        votes = 0
        for r in range(k):
            votes += train_minority[order[r]]
        out[i] = votes / k
    return out


# --- dispatch --------------------------------------------------------------

def normal_cdf_array(z):
    """Standard normal CDF of a 1-D float array (no validation)."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    if HAS_NUMBA:
        return _normal_cdf_numba(z)
    return _normal_cdf_numpy(z)


def count_at_or_above(x, threshold):
    """Number of entries of ``x`` that are ``>= threshold``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if HAS_NUMBA:
        return int(_count_at_or_above_numba(x, float(threshold)))
    return _count_at_or_above_numpy(x, float(threshold))


def knn_minority_fraction(train_x, train_minority, test_x, k):
    """Fraction of the ``k`` nearest training rows that are minority.

    ``train_minority`` is an int array of 0/1 flags. Distance is squared
    Euclidean; ties in distance go to the lower training index.
    """
    train_x = np.ascontiguousarray(train_x, dtype=np.float64)
    test_x = np.ascontiguousarray(test_x, dtype=np.float64)
    train_minority = np.ascontiguousarray(train_minority, dtype=np.int64)
    if HAS_NUMBA:
        return _knn_minority_fraction_numba(train_x, train_minority, test_x, int(k))
    return _knn_minority_fraction_numpy(train_x, train_minority, test_x, int(k))
