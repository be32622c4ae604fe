"""Metric surfaces over the triplet space and their comparison with fitted models.

The minority class is the positive class everywhere. Confusion rates are
population fractions, so the theoretical metrics carry no sampling noise.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import InputError
from .landscape import RegimeLabel, _gradient, _shift_and_margin, class_errors
from .specfun import normal_cdf

__all__ = [
    "ConfusionRates",
    "MetricBundle",
    "PrCurve",
    "RobustnessPoint",
    "RobustnessReport",
    "SummaryRow",
    "METRIC_NAMES",
    "confusion_rates",
    "metrics_from_counts",
    "theoretical_metrics",
    "theoretical_pr_curve",
    "regime_summary",
    "robustness_ratio",
]


@dataclass(frozen=True)
class ConfusionRates:
    tp: float
    fp: float
    fn: float
    tn: float


@dataclass(frozen=True)
class MetricBundle:
    recall_minority: float
    precision_minority: float
    f1_minority: float
    balanced_accuracy: float
    balanced_error_rate: float
    cohen_kappa: float
    pr_auc_minority: Optional[float] = None
    # True when nothing was predicted minority and precision was set to 0
    precision_undefined: bool = False


METRIC_NAMES = (
    "recall_minority",
    "precision_minority",
    "f1_minority",
    "balanced_accuracy",
    "balanced_error_rate",
    "cohen_kappa",
)


def _f1(recall, precision):
    if recall + precision == 0.0:
        return 0.0
    return 2.0 * recall * precision / (recall + precision)


def _cohen_kappa(tp, fp, fn, tn):
    total = tp + fp + fn + tn
    p_o = (tp + tn) / total
    p_e = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / (total * total)
    if p_e >= 1.0:
        return 0.0
    return (p_o - p_e) / (1.0 - p_e)


def _ratio(num, den):
    return num / den if den > 0 else 0.0


def metrics_from_counts(tp, fp, fn, tn, pr_auc=None):
    """Metric bundle from a confusion table (counts or fractions)."""
    tp, fp, fn, tn = (float(v) for v in (tp, fp, fn, tn))
    if min(tp, fp, fn, tn) < 0 or tp + fp + fn + tn <= 0:
        raise InputError("confusion entries must be non-negative with a positive total")
    recall = _ratio(tp, tp + fn)
    specificity = _ratio(tn, tn + fp)
    precision = _ratio(tp, tp + fp)
    ber = 1.0 - 0.5 * (recall + specificity)
    return MetricBundle(
        recall_minority=recall,
        precision_minority=precision,
        f1_minority=_f1(recall, precision),
        balanced_accuracy=1.0 - ber,
        balanced_error_rate=ber,
        cohen_kappa=_cohen_kappa(tp, fp, fn, tn),
        pr_auc_minority=pr_auc,
        precision_undefined=(tp + fp) == 0.0,
    )


def _evaluation_priors(point, evaluation_prevalence):
    if evaluation_prevalence is None:
        pr = point.priors
        return pr.pi_minority, pr.pi_majority
    q = float(evaluation_prevalence)
    if not 0.0 < q < 1.0:
        raise InputError("evaluation_prevalence must lie in (0, 1)")
    return q, 1.0 - q


def confusion_rates(point, evaluation_prevalence=None):
    """Population confusion fractions of the Bayes rule at ``point``.

    The rule is always tuned to the training priors implied by ``point.eta``.
    By default it is also evaluated at that prevalence; pass
    ``evaluation_prevalence=0.5`` to score it on a balanced population.
    """
    errs = class_errors(point)
    hit_min, hit_maj = _hit_rates(point)
    q_min, q_maj = _evaluation_priors(point, evaluation_prevalence)
    return ConfusionRates(
        tp=q_min * hit_min,
        fp=q_maj * errs.e_majority,
        fn=q_min * errs.e_minority,
        tn=q_maj * hit_maj,
    )


def _hit_rates(point):
    # 1 - e computed as the complementary CDF, avoiding cancellation when e -> 1
    m, t, _ = _shift_and_margin(point.eta, point.kappa, point.delta)
    return normal_cdf(m - t), normal_cdf(m + t)


def theoretical_metrics(point, with_pr_auc=False, evaluation_prevalence=None):
    """Bayes-rule metric bundle at ``point``.

    Recall is ``1 - e_minority`` exactly; BER is the mean class error.
    Precision, F1, Cohen's kappa and PR-AUC depend on the evaluation
    prevalence (see :func:`confusion_rates`).
    """
    errs = class_errors(point)
    rates = confusion_rates(point, evaluation_prevalence)
    recall = _hit_rates(point)[0]
    predicted_pos = rates.tp + rates.fp
    precision = rates.tp / predicted_pos if predicted_pos > 0 else 0.0
    ber = 0.5 * (errs.e_minority + errs.e_majority)
    return MetricBundle(
        recall_minority=recall,
        precision_minority=precision,
        f1_minority=_f1(recall, precision),
        balanced_accuracy=1.0 - ber,
        balanced_error_rate=ber,
        cohen_kappa=_cohen_kappa(rates.tp, rates.fp, rates.fn, rates.tn),
        pr_auc_minority=theoretical_pr_curve(point, evaluation_prevalence=evaluation_prevalence).auc
        if with_pr_auc else None,
        precision_undefined=predicted_pos == 0.0,
    )


# --- precision-recall curve --------------------------------------------------

@dataclass(frozen=True)
class PrCurve:
    points: tuple  # (recall, precision), by descending score threshold
    auc: float


def _trapezoid(x, y):
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) * 0.5))


def theoretical_pr_curve(point, n_thresholds=2001, evaluation_prevalence=None):
    """Precision-recall curve of the one-dimensional Bayes score.

    The minority score is ``-T`` where ``T`` is the discriminant statistic,
    so minority scores follow N(+D**2/2, D**2) and majority scores
    N(-D**2/2, D**2) with ``D = delta*sqrt(kappa)``. Thresholds are spaced
    linearly over six score standard deviations beyond both means.
    """
    n_thresholds = int(n_thresholds)
    if n_thresholds < 11:
        raise InputError("n_thresholds must be >= 11")
    d = point.effective_margin
    half = 0.5 * d * d
    cuts = np.linspace(half + 6.0 * d, -half - 6.0 * d, n_thresholds)
    recall = normal_cdf((half - cuts) / d)
    fpr = normal_cdf((-half - cuts) / d)
    q_min, q_maj = _evaluation_priors(point, evaluation_prevalence)
    tp = q_min * recall
    fp = q_maj * fpr
    denom = tp + fp
    safe = np.where(denom > 0, denom, 1.0)
    # minority scores dominate in the upper tail, so the limiting precision is 1
    precision = np.where(denom > 0, tp / safe, 1.0)
    auc = _trapezoid(recall, precision)
    return PrCurve(points=tuple(zip(recall.tolist(), precision.tolist())), auc=auc)


# --- regime summaries --------------------------------------------------------

class SummaryRow(NamedTuple):
    regime: str
    metric_name: str
    mean: float
    q25: float
    median: float
    q75: float


def regime_summary(report, points):
    """Quartile summary of theoretical metrics grouped by regime label."""
    if len(points) != len(report.grid):
        raise InputError(f"{len(points)} points for a report of {len(report.grid)} grid entries")
    for pt, g in zip(points, report.grid):
        if not math.isclose(pt.eta, g.eta, rel_tol=1e-12):
            raise InputError(f"point eta {pt.eta} does not match report eta {g.eta}")

    groups = {}
    for pt, g in zip(points, report.grid):
        groups.setdefault(g.label, []).append(theoretical_metrics(pt))

    rows = []
    for label in RegimeLabel:
        bundles = groups.get(label)
        if not bundles:
            continue
        for name in METRIC_NAMES:
            vals = np.array([getattr(b, name) for b in bundles])
            q25, med, q75 = np.quantile(vals, [0.25, 0.5, 0.75])
            rows.append(SummaryRow(label.value, name, float(vals.mean()), float(q25), float(med), float(q75)))
    return rows


# --- robustness ratio --------------------------------------------------------

@dataclass(frozen=True)
class RobustnessPoint:
    eta: float
    empirical_slope: float
    theoretical_slope: float
    rho: Optional[float]


@dataclass(frozen=True)
class RobustnessReport:
    model_name: str
    grid: tuple


_NEGLIGIBLE_SLOPE = 1e-9


def robustness_ratio(model_curve, theory_curve, model_name="model"):
    """Ratio of a model's metric slope to the theoretical one, per eta.

    Both curves are ``[(eta, value), ...]`` on the same ascending grid.
    ``rho`` is ``None`` where the theoretical slope is negligible.
    """
    model = np.asarray(model_curve, dtype=np.float64)
    theory = np.asarray(theory_curve, dtype=np.float64)
    if model.ndim != 2 or theory.ndim != 2 or model.shape[1] != 2 or model.shape != theory.shape:
        raise InputError("curves must be equal-length sequences of (eta, value)")
    if not np.allclose(model[:, 0], theory[:, 0], rtol=1e-12, atol=0):
        raise InputError("model and theory curves use different eta grids")
    if np.any(model[:, 0] < 1.0):
        raise InputError("eta grid must be >= 1")
    log_eta = np.log(model[:, 0])
    s_model = _gradient(log_eta, model[:, 1])
    s_theory = _gradient(log_eta, theory[:, 1])
    grid = []
    for eta, sm, st in zip(model[:, 0].tolist(), s_model.tolist(), s_theory.tolist()):
        rho = sm / st if abs(st) > _NEGLIGIBLE_SLOPE else None
        grid.append(RobustnessPoint(eta, sm, st, rho))
    return RobustnessReport(model_name=model_name, grid=tuple(grid))
