"""Closed-form Bayes errors, risks and the regime taxonomy over (eta, kappa, delta).

Conventions used throughout the package:

* ``eta = pi_majority / pi_minority >= 1``. Values below 1 are rejected, never
  flipped.
* ``e_minority`` is the class-conditional error that grows with ``eta``;
  ``e_majority`` is the one that shrinks.
* The effective margin is ``delta * sqrt(kappa)``, applied for every kappa.

With ``m = delta*sqrt(kappa)/2`` and ``t = ln(eta) / (delta*sqrt(kappa))``::

    e_minority = Phi(-m + t)
    e_majority = Phi(-m - t)
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, InputError
from .specfun import normal_cdf, normal_pdf

__all__ = [
    "TripletPoint",
    "Priors",
    "ErrorPair",
    "RegimeLabel",
    "Target",
    "RegimePoint",
    "RegimeReport",
    "class_errors",
    "bayes_risk",
    "balanced_risk",
    "deterioration",
    "analytic_error_slopes",
    "numeric_slope",
    "eta_max",
    "classify_regimes",
    "error_curves",
    "target_curve",
]


def _finite_positive(name, value):
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return value


def _valid_eta(value):
    value = float(value)
    if not math.isfinite(value) or value < 1.0:
        raise DomainError(f"eta must be finite and >= 1 (majority/minority), got {value!r}")
    return value


@dataclass(frozen=True)
class Priors:
    pi_majority: float
    pi_minority: float

    @classmethod
    def from_eta(cls, eta):
        eta = _valid_eta(eta)
        return cls(pi_majority=eta / (1.0 + eta), pi_minority=1.0 / (1.0 + eta))


@dataclass(frozen=True)
class TripletPoint:
    """Coordinates of one point in the imbalance landscape."""

    eta: float
    kappa: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "eta", _valid_eta(self.eta))
        object.__setattr__(self, "kappa", _finite_positive("kappa", self.kappa))
        object.__setattr__(self, "delta", _finite_positive("delta", self.delta))

    @property
    def effective_margin(self):
        return self.delta * math.sqrt(self.kappa)

    @property
    def priors(self):
        return Priors.from_eta(self.eta)


@dataclass(frozen=True)
class ErrorPair:
    e_minority: float
    e_majority: float


class RegimeLabel(str, Enum):
    NORMAL = "Normal"
    MILD = "Mild"
    EXTREME = "Extreme"
    CATASTROPHIC = "Catastrophic"

    @property
    def severity(self):
        return _SEVERITY[self]


_SEVERITY = {
    RegimeLabel.NORMAL: 0,
    RegimeLabel.MILD: 1,
    RegimeLabel.EXTREME: 2,
    RegimeLabel.CATASTROPHIC: 3,
}


class Target(str, Enum):
    """Quantity whose deterioration and slope drive the taxonomy."""

    BAYES_RISK = "bayes_risk"
    BALANCED_RISK = "balanced_risk"
    MINORITY_ERROR = "minority_error"


def _as_target(target):
    try:
        return Target(target)
    except ValueError:
        choices = ", ".join(t.value for t in Target)
        raise InputError(f"unknown target {target!r}; expected one of {choices}") from None


def _shift_and_margin(eta, kappa, delta):
    dm = delta * math.sqrt(kappa)
    return dm / 2.0, np.log(eta) / dm, dm


def class_errors(point):
    """Minority and majority class-conditional Bayes errors at ``point``."""
    m, t, _ = _shift_and_margin(point.eta, point.kappa, point.delta)
    return ErrorPair(e_minority=normal_cdf(-m + t), e_majority=normal_cdf(-m - t))


def bayes_risk(point):
    """Prior-weighted Bayes risk ``pi_min*e_min + pi_maj*e_maj``.

    Not monotone in eta: at (e**2, 1, 2) it is below its balanced value.
    """
    errs = class_errors(point)
    pr = point.priors
    return pr.pi_minority * errs.e_minority + pr.pi_majority * errs.e_majority


def balanced_risk(point):
    errs = class_errors(point)
    return 0.5 * (errs.e_minority + errs.e_majority)


def _target_value(point, target):
    target = _as_target(target)
    if target is Target.BAYES_RISK:
        return bayes_risk(point)
    if target is Target.BALANCED_RISK:
        return balanced_risk(point)
    return class_errors(point).e_minority


def deterioration(point, target=Target.BALANCED_RISK):
    """Excess of ``target`` at ``point`` over its value at eta = 1."""
    ref = TripletPoint(1.0, point.kappa, point.delta)
    return _target_value(point, target) - _target_value(ref, target)


def analytic_error_slopes(point):
    """Derivatives of (e_minority, e_majority) with respect to ln(eta)."""
    m, t, dm = _shift_and_margin(point.eta, point.kappa, point.delta)
    return normal_pdf(-m + t) / dm, -normal_pdf(-m - t) / dm


def eta_max(kappa, delta):
    """Catastrophic threshold ``exp(delta**2 * kappa / 2)``; may be ``inf``."""
    kappa = _finite_positive("kappa", kappa)
    delta = _finite_positive("delta", delta)
    try:
        return math.exp(0.5 * delta * delta * kappa)
    except OverflowError:
        return math.inf


# --- vectorized curves ------------------------------------------------------

def _eta_array(eta):
    arr = np.atleast_1d(np.asarray(eta, dtype=np.float64))
    if not np.all(np.isfinite(arr)) or np.any(arr < 1.0):
        raise DomainError("eta values must be finite and >= 1")
    return arr


def error_curves(eta, kappa, delta):
    """Vectorized :func:`class_errors`; returns ``(e_minority, e_majority)`` arrays."""
    eta = _eta_array(eta)
    kappa = _finite_positive("kappa", kappa)
    delta = _finite_positive("delta", delta)
    m, t, _ = _shift_and_margin(eta, kappa, delta)
    return normal_cdf(-m + t), normal_cdf(-m - t)


def target_curve(eta, kappa, delta, target=Target.BALANCED_RISK):
    """Values of ``target`` along an array of eta."""
    target = _as_target(target)
    eta = _eta_array(eta)
    e_min, e_maj = error_curves(eta, kappa, delta)
    if target is Target.MINORITY_ERROR:
        return e_min
    if target is Target.BALANCED_RISK:
        return 0.5 * (e_min + e_maj)
    return (e_min + eta * e_maj) / (1.0 + eta)


def _gradient(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise InputError("slope needs two 1-D sequences of equal length")
    if x.size < 3:
        raise InputError("slope needs at least 3 points")
    if not np.all(np.isfinite(x)) or np.any(np.diff(x) <= 0):
        raise InputError("slope grid must be finite and strictly increasing")
    # Second order everywhere, written on secant slopes so a constant curve
    # gives exactly zero and an affine one its slope up to rounding.
    h = np.diff(x)
    sec = np.diff(y) / h
    out = np.empty_like(y)
    h1, h2 = h[:-1], h[1:]
    out[1:-1] = (h2 * sec[:-1] + h1 * sec[1:]) / (h1 + h2)
    out[0] = sec[0] - h[0] * (sec[1] - sec[0]) / (h[0] + h[1])
    out[-1] = sec[-1] + h[-1] * (sec[-1] - sec[-2]) / (h[-1] + h[-2])
    return out


def numeric_slope(curve):
    """Finite-difference slope of ``[(ln_eta, value), ...]``.

    Returns ``[(ln_eta, slope), ...]`` on the same grid.
    """
    arr = np.asarray(curve, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError("curve must be a sequence of (ln_eta, value) pairs")
    slope = _gradient(arr[:, 0], arr[:, 1])
    return list(zip(arr[:, 0].tolist(), slope.tolist()))


# --- regime taxonomy --------------------------------------------------------

@dataclass(frozen=True)
class RegimePoint:
    eta: float
    slope: float
    normalized_slope: float
    label: RegimeLabel


@dataclass(frozen=True)
class RegimeReport:
    kappa: float
    delta: float
    target: Target
    grid: tuple
    s_max: float
    eta_max: float
    tau1_fraction: float
    tau2_fraction: float

    @property
    def etas(self):
        return np.array([g.eta for g in self.grid])

    @property
    def labels(self):
        return [g.label for g in self.grid]


def classify_regimes(kappa, delta, eta_grid, target=Target.BALANCED_RISK,
                     tau1_fraction=0.1, tau2_fraction=0.5):
    """Label each eta of ``eta_grid`` Normal/Mild/Extreme/Catastrophic.

    The slope of ``target`` over ln(eta) is normalized by its maximum
    magnitude on this grid. Points with ``eta > eta_max(kappa, delta)`` are
    Catastrophic regardless of slope.
    """
    target = _as_target(target)
    tau1_fraction = float(tau1_fraction)
    tau2_fraction = float(tau2_fraction)
    if not 0.0 < tau1_fraction < tau2_fraction < 1.0:
        raise InputError("thresholds must satisfy 0 < tau1 < tau2 < 1")
    etas = _eta_array(eta_grid)
    values = target_curve(etas, kappa, delta, target)
    slope = _gradient(np.log(etas), values)
    s_abs = np.abs(slope)
    s_max = float(s_abs.max())
    norm = s_abs / s_max if s_max > 0.0 else np.zeros_like(s_abs)
    threshold = eta_max(kappa, delta)

    points = []
    for eta, s, ns in zip(etas.tolist(), slope.tolist(), norm.tolist()):
        if eta > threshold:
            label = RegimeLabel.CATASTROPHIC
        elif ns <= tau1_fraction:
            label = RegimeLabel.NORMAL
        elif ns <= tau2_fraction:
            label = RegimeLabel.MILD
        else:
            label = RegimeLabel.EXTREME
        points.append(RegimePoint(eta=eta, slope=s, normalized_slope=ns, label=label))

    return RegimeReport(
        kappa=float(kappa),
        delta=float(delta),
        target=target,
        grid=tuple(points),
        s_max=s_max,
        eta_max=threshold,
        tau1_fraction=tau1_fraction,
        tau2_fraction=tau2_fraction,
    )
