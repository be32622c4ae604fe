"""Plug-in and non-parametric classifiers written against the minority class.

Every model exposes ``predict_scores`` returning a minority score and
``predict`` returning labels (``MINORITY = 0``, ``MAJORITY = 1``). For the
posterior families the score is the minority posterior log-odds, including
the empirical log-prior term, and ties (score 0) go to the majority as in
the Bayes rule. For kNN the score is the minority vote fraction.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InputError, NumericError, UnfitError
from .kernels import knn_minority_fraction
from .metrics import metrics_from_counts
from .simulate import MAJORITY, MINORITY

__all__ = [
    "FAMILIES",
    "PARAMETRIC_FAMILIES",
    "MIN_PER_CLASS",
    "ClassifierSpec",
    "ConfusionMatrix",
    "TripletEstimate",
    "FittedModel",
    "LogisticModel",
    "LdaModel",
    "QdaModel",
    "GnbModel",
    "KnnModel",
    "fit",
    "predict_scores",
    "evaluate",
    "pr_auc",
    "estimate_triplet",
]

FAMILIES = ("logistic", "lda", "qda", "gnb", "knn")
PARAMETRIC_FAMILIES = ("logistic", "lda", "qda", "gnb")
MIN_PER_CLASS = {"logistic": 1, "lda": 2, "qda": 2, "gnb": 2, "knn": 1}


@dataclass(frozen=True)
class ClassifierSpec:
    family: str
    l2_strength: float = 1.0
    max_iterations: int = 100
    tolerance: float = 1e-8
    k: int = 5
    # covariance floor, relative to the mean feature variance
    variance_floor: float = 1e-6

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown classifier family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        if not (math.isfinite(self.l2_strength) and self.l2_strength >= 0):
            raise DomainError("l2_strength must be >= 0")
        if int(self.max_iterations) < 1:
            raise DomainError("max_iterations must be >= 1")
        if not (math.isfinite(self.tolerance) and self.tolerance > 0):
            raise DomainError("tolerance must be > 0")
        if int(self.k) < 1:
            raise DomainError("k must be >= 1")
        if not (math.isfinite(self.variance_floor) and self.variance_floor > 0):
            raise DomainError("variance_floor must be > 0")

    @property
    def name(self):
        return self.family


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class TripletEstimate:
    eta_hat: float
    kappa_hat: float
    delta_hat: float
    # True when the label-0 class outnumbered label 1 and roles were swapped
    flipped: bool = False


# --- models ---------------------------------------------------------------------

@dataclass(eq=False)
class FittedModel:
    family: str
    p: int
    provenance: dict = field(default_factory=dict)

    def _check(self, features):
        x = np.asarray(features, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.p:
            raise InputError(f"{self.family}: expected {self.p} features, got shape {x.shape}")
        return x

    def predict_scores(self, features):
        return self._scores(self._check(features))

    def predict(self, features):
        s = self.predict_scores(features)
        return np.where(s > 0.0, MINORITY, MAJORITY).astype(np.int8)


@dataclass(eq=False)
class LogisticModel(FittedModel):
    weights: np.ndarray = None
    intercept: float = 0.0
    objective_trace: list = field(default_factory=list)
    gradient_norm: float = 0.0

    def _scores(self, x):
        return x @ self.weights + self.intercept


@dataclass(eq=False)
class LdaModel(FittedModel):
    """Linear discriminant with a shared covariance.

    ``score(x) = w @ x - offset + log_prior`` where ``log_prior`` is
    ``ln(pi_min / pi_maj) = -ln(eta_hat)``.
    """

    weights: np.ndarray = None
    offset: float = 0.0
    log_prior: float = 0.0

    @classmethod
    def from_parameters(cls, mu_minority, mu_majority, covariance, eta):
        mu0 = np.asarray(mu_minority, dtype=np.float64)
        mu1 = np.asarray(mu_majority, dtype=np.float64)
        cov = np.asarray(covariance, dtype=np.float64)
        if cov.ndim == 1:
            cov = np.diag(cov)
        w, offset = _lda_direction(mu0, mu1, cov)
        return cls(family="lda", p=mu0.shape[0], weights=w, offset=offset, log_prior=-math.log(eta))

    @property
    def balanced_threshold(self):
        """Value of ``w @ x`` on the boundary when priors are equal."""
        return self.offset

    @property
    def threshold(self):
        return self.offset - self.log_prior

    def _scores(self, x):
        return x @ self.weights - self.offset + self.log_prior


@dataclass(eq=False)
class QdaModel(FittedModel):
    means: tuple = ()
    cholesky: tuple = ()
    log_dets: tuple = ()
    log_prior: float = 0.0

    def _scores(self, x):
        return _gauss_logpdf(x, self.means[0], self.cholesky[0], self.log_dets[0]) \
            - _gauss_logpdf(x, self.means[1], self.cholesky[1], self.log_dets[1]) + self.log_prior


@dataclass(eq=False)
class GnbModel(FittedModel):
    means: np.ndarray = None  # (2, p), row 0 minority
    variances: np.ndarray = None
    log_prior: float = 0.0

    def _scores(self, x):
        ll = []
        for c in (0, 1):
            v = self.variances[c]
            ll.append(-0.5 * np.sum((x - self.means[c]) ** 2 / v + np.log(2 * np.pi * v), axis=1))
        return ll[0] - ll[1] + self.log_prior


@dataclass(eq=False)
class KnnModel(FittedModel):
    k: int = 5
    train_x: np.ndarray = None
    train_minority: np.ndarray = None

    def _scores(self, x):
        return knn_minority_fraction(self.train_x, self.train_minority, x, min(self.k, self.train_x.shape[0]))

    def predict(self, features):
        return np.where(self.predict_scores(features) >= 0.5, MINORITY, MAJORITY).astype(np.int8)


# --- fitting helpers ------------------------------------------------------------

def _cholesky(cov, what):
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise NumericError(f"{what}: covariance is not positive definite after regularization") from None


def _lda_direction(mu0, mu1, cov):
    # w points toward the minority mean: score grows with minority evidence
    chol = _cholesky(cov, "lda")
    diff = mu0 - mu1
    w = np.linalg.solve(chol.T, np.linalg.solve(chol, diff))
    offset = 0.5 * float((mu0 + mu1) @ w)
    return w, offset


def _gauss_logpdf(x, mean, chol, log_det):
    z = np.linalg.solve(chol, (x - mean).T)
    return -0.5 * (np.sum(z * z, axis=0) + log_det + mean.shape[0] * math.log(2 * math.pi))


def _regularize(cov, floor_rel, ref_var):
    out = cov.copy()
    out[np.diag_indices_from(out)] += floor_rel * ref_var
    return out


def _split(train):
    x = np.asarray(train.features, dtype=np.float64)
    y = np.asarray(train.labels)
    x0, x1 = x[y == MINORITY], x[y == MAJORITY]
    return x, y, x0, x1


_OBJ_ROUNDING = 1e-12


def _fit_logistic(spec, x, y, base):
    n, p = x.shape
    target = (y == MINORITY).astype(np.float64)
    design = np.hstack([np.ones((n, 1)), x])
    penalty = np.full(p + 1, spec.l2_strength)
    penalty[0] = 0.0
    beta = np.zeros(p + 1)
    # start the intercept at the empirical log-odds
    frac = target.mean()
    beta[0] = math.log(frac / (1 - frac))

    def objective(b):
        eta = design @ b
        return float(np.sum(np.logaddexp(0.0, eta) - target * eta) + 0.5 * np.sum(penalty * b * b))

    obj = objective(beta)
    trace = [obj]
    grad_norm = math.inf
    for _ in range(int(spec.max_iterations)):
        eta = design @ beta
        prob = 0.5 * (1.0 + np.tanh(0.5 * eta))
        grad = design.T @ (prob - target) + penalty * beta
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= spec.tolerance:
            break
        wts = prob * (1.0 - prob)
        hess = (design * wts[:, None]).T @ design
        hess[np.diag_indices_from(hess)] += penalty + 1e-12
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            raise NumericError("logistic: singular Hessian") from None
        # near the optimum the objective change falls below its rounding
        # error, so accept steps that do not increase it beyond that noise
        slack = _OBJ_ROUNDING * max(1.0, abs(obj))
        t = 1.0
        while True:
            cand = beta - t * step
            cand_obj = objective(cand)
            if cand_obj <= obj + slack or t < 1e-10:
                break
            t *= 0.5
        if cand_obj > obj + slack:
            break
        beta, obj = cand, cand_obj
        trace.append(obj)
    else:
        eta = design @ beta
        prob = 0.5 * (1.0 + np.tanh(0.5 * eta))
        grad_norm = float(np.linalg.norm(design.T @ (prob - target) + penalty * beta))
    if grad_norm > spec.tolerance:
        raise NumericError(f"logistic: gradient norm {grad_norm:.3g} above tolerance after {len(trace) - 1} steps")
    return LogisticModel(weights=beta[1:].copy(), intercept=float(beta[0]), objective_trace=trace,
                         gradient_norm=grad_norm, **base)


def fit(spec, train):
    """Fit ``spec`` on ``train`` (a :class:`~imbalance_landscape.simulate.Dataset`)."""
    x, y, x0, x1 = _split(train)
    n0, n1 = x0.shape[0], x1.shape[0]
    if n0 == 0 or n1 == 0:
        raise UnfitError(f"{spec.family}: training data contains a single class")
    need = MIN_PER_CLASS[spec.family]
    if n0 < need or n1 < need:
        raise UnfitError(f"{spec.family}: needs >= {need} samples per class, got {n0} minority / {n1} majority")
    p = x.shape[1]
    log_prior = math.log(n0 / n1)
    base = dict(family=spec.family, p=p, provenance={
        "seed": train.provenance.get("seed"),
        "eta": n1 / n0,
        "n_minority": n0,
        "n_majority": n1,
    })

    if spec.family == "logistic":
        return _fit_logistic(spec, x, y, base)

    if spec.family == "knn":
        return KnnModel(k=int(spec.k), train_x=x.copy(), train_minority=(y == MINORITY).astype(np.int64), **base)

    mu0, mu1 = x0.mean(axis=0), x1.mean(axis=0)
    r0, r1 = x0 - mu0, x1 - mu1

    if spec.family == "lda":
        pooled = (r0.T @ r0 + r1.T @ r1) / (n0 + n1 - 2)
        pooled = _regularize(pooled, spec.variance_floor, float(np.mean(np.diag(pooled))) or 1.0)
        w, offset = _lda_direction(mu0, mu1, pooled)
        return LdaModel(weights=w, offset=offset, log_prior=log_prior, **base)

    if spec.family == "qda":
        covs = [r0.T @ r0 / (n0 - 1), r1.T @ r1 / (n1 - 1)]
        ref = float(np.mean(np.concatenate([np.diag(c) for c in covs]))) or 1.0
        chols, dets = [], []
        for c in covs:
            ch = _cholesky(_regularize(c, spec.variance_floor, ref), "qda")
            chols.append(ch)
            dets.append(2.0 * float(np.sum(np.log(np.diag(ch)))))
        return QdaModel(means=(mu0, mu1), cholesky=tuple(chols), log_dets=tuple(dets), log_prior=log_prior, **base)

    # gnb
    var = np.vstack([r0.var(axis=0), r1.var(axis=0)])
    ref = float(var.mean()) or 1.0
    var = np.maximum(var, spec.variance_floor * ref)
    return GnbModel(means=np.vstack([mu0, mu1]), variances=var, log_prior=log_prior, **base)


def predict_scores(model, features):
    return model.predict_scores(features)


# --- evaluation -----------------------------------------------------------------

def pr_auc(scores, truth):
    """Trapezoidal area under the minority precision-recall curve.

    Thresholds are the distinct score values, highest first; tied scores
    enter together. The curve is anchored at recall 0 with the first
    precision. Returns ``None`` when ``truth`` has no minority or no
    majority rows.
    """
    scores = np.asarray(scores, dtype=np.float64)
    pos = np.asarray(truth) == MINORITY
    n_pos = int(pos.sum())
    if n_pos == 0 or n_pos == pos.size:
        return None
    order = np.argsort(-scores, kind="stable")
    s, hit = scores[order], pos[order]
    tp = np.cumsum(hit)
    fp = np.cumsum(~hit)
    # last index of each run of equal scores
    ends = np.r_[np.nonzero(np.diff(s))[0], s.size - 1]
    tp, fp = tp[ends].astype(np.float64), fp[ends].astype(np.float64)
    recall = np.r_[0.0, tp / n_pos]
    precision = tp / (tp + fp)
    precision = np.r_[precision[0], precision]
    return float(np.sum(np.diff(recall) * (precision[1:] + precision[:-1]) * 0.5))


def evaluate(scores, predicted, truth):
    """Empirical metric bundle and confusion matrix (minority positive)."""
    scores = np.asarray(scores)
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if not (scores.shape == predicted.shape == truth.shape) or scores.ndim != 1:
        raise InputError("scores, predictions and labels must be 1-D with equal length")
    if scores.size == 0:
        raise InputError("nothing to evaluate")
    pred_pos = predicted == MINORITY
    true_pos = truth == MINORITY
    cm = ConfusionMatrix(
        tp=int(np.sum(pred_pos & true_pos)),
        fp=int(np.sum(pred_pos & ~true_pos)),
        fn=int(np.sum(~pred_pos & true_pos)),
        tn=int(np.sum(~pred_pos & ~true_pos)),
    )
    bundle = metrics_from_counts(cm.tp, cm.fp, cm.fn, cm.tn, pr_auc=pr_auc(scores, truth))
    return bundle, cm


# --- triplet estimation -----------------------------------------------------------

def estimate_triplet(data, epsilon=1e-6):
    """Plug-in estimates of (eta, kappa, delta) from a labelled dataset.

    Delta uses the pooled within-class diagonal variance, floored at
    ``epsilon`` times its mean, so it is defined even when ``n <= p``.
    """
    x, y, x0, x1 = _split(data)
    n0, n1 = x0.shape[0], x1.shape[0]
    if n0 == 0 or n1 == 0:
        raise UnfitError("triplet estimation needs both classes")
    n, p = x.shape
    flipped = n0 > n1
    eta_hat = max(n0, n1) / min(n0, n1)
    mu0, mu1 = x0.mean(axis=0), x1.mean(axis=0)
    ss = ((x0 - mu0) ** 2).sum(axis=0) + ((x1 - mu1) ** 2).sum(axis=0)
    var = ss / max(n - 2, 1)
    ref = float(var.mean())
    var = np.maximum(var, epsilon * ref if ref > 0 else epsilon)
    delta_hat = float(np.sqrt(np.sum((mu1 - mu0) ** 2 / var)))
    return TripletEstimate(eta_hat=eta_hat, kappa_hat=n / p, delta_hat=delta_hat, flipped=flipped)


_RUNNER_NAMES = ("ExperimentConfig", "ExperimentRow", "run_experiment", "degradation_curves")


def __getattr__(name):
    # the experiment runner lives in its own module (it imports this one)
    if name in _RUNNER_NAMES:
        from . import experiment

        return getattr(experiment, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
