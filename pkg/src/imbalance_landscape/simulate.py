"""Monte Carlo oracles and the controlled-imbalance Gaussian generator.

Random streams come from Philox generators keyed by ``(seed, *task)``
through :class:`numpy.random.SeedSequence`, so every draw is reproducible no
matter in which order, or in which process, tasks are evaluated.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InputError
from .kernels import count_at_or_above
from .landscape import Priors, TripletPoint

__all__ = [
    "MINORITY",
    "MAJORITY",
    "GaussianModel",
    "Dataset",
    "McEstimate",
    "stream",
    "sample_scores",
    "mc_class_errors",
    "make_gaussian_model",
    "minority_count",
    "generate_dataset",
    "population_bayes_classify",
    "write_dataset_csv",
    "read_dataset_csv",
]

MINORITY = 0
MAJORITY = 1

_CLASS_NAMES = {"minority": MINORITY, "majority": MAJORITY, MINORITY: MINORITY, MAJORITY: MAJORITY}

# task-space prefixes keeping independent uses of one seed apart
_TASK_SCORES = 0
_TASK_FEATURES = 1
_TASK_SHUFFLE = 2


def stream(seed, *task):
    """Independent Philox generator for ``(seed, *task)``."""
    key = [int(seed), *(int(t) for t in task)]
    if any(k < 0 for k in key):
        raise DomainError("seeds and task indices must be non-negative integers")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def _class_code(cls):
    try:
        return _CLASS_NAMES[cls]
    except (KeyError, TypeError):
        raise DomainError(f"class must be 'minority' or 'majority', got {cls!r}") from None


# --- Monte Carlo on the one-dimensional score --------------------------------

@dataclass(frozen=True)
class McEstimate:
    estimate: float
    half_width_95: float
    n_samples: int

    @classmethod
    def from_count(cls, count, n):
        p = count / n
        return cls(p, 1.96 * math.sqrt(p * (1.0 - p) / n), int(n))

    def wilson_interval(self, z=1.96):
        """Wilson score interval; stays informative at zero or full counts."""
        n, p = self.n_samples, self.estimate
        z2 = z * z
        centre = (p + z2 / (2 * n)) / (1 + z2 / n)
        half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n)
        lo = 0.0 if p == 0.0 else max(0.0, centre - half)
        hi = 1.0 if p == 1.0 else min(1.0, centre + half)
        return lo, hi

    def brackets(self, value):
        """True if ``value`` lies in the 95% Wilson interval of this estimate."""
        lo, hi = self.wilson_interval()
        return lo <= value <= hi


def sample_scores(n, cls, delta_eff, seed, task=0):
    """Draw discriminant scores T for one class.

    Majority scores follow N(+D**2/2, D**2), minority N(-D**2/2, D**2), with
    ``D = delta_eff``. ``task`` selects an independent stream under ``seed``.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    delta_eff = float(delta_eff)
    if not math.isfinite(delta_eff) or delta_eff <= 0:
        raise DomainError("delta_eff must be finite and > 0")
    code = _class_code(cls)
    sign = 1.0 if code == MAJORITY else -1.0
    rng = stream(seed, _TASK_SCORES, task, code)
    return rng.normal(sign * 0.5 * delta_eff * delta_eff, delta_eff, size=n)


def mc_class_errors(n_per_class, point, seed, task=0):
    """Monte Carlo estimates of ``(e_minority, e_majority)`` at ``point``.

    The Bayes rule picks the majority class when ``T >= -ln(eta)``.
    """
    n = int(n_per_class)
    if n < 1000:
        raise DomainError("n_per_class must be >= 1000")
    if not isinstance(point, TripletPoint):
        point = TripletPoint(*point)
    d = point.effective_margin
    threshold = -math.log(point.eta)
    t_min = sample_scores(n, MINORITY, d, seed, task)
    t_maj = sample_scores(n, MAJORITY, d, seed, task)
    minority_wrong = count_at_or_above(t_min, threshold)
    majority_wrong = n - count_at_or_above(t_maj, threshold)
    return McEstimate.from_count(minority_wrong, n), McEstimate.from_count(majority_wrong, n)


# --- p-dimensional Gaussian model -----------------------------------------------

@dataclass(frozen=True, eq=False)
class GaussianModel:
    mu_minority: np.ndarray
    mu_majority: np.ndarray
    covariance_diagonal: np.ndarray
    priors: Priors

    @property
    def p(self):
        return self.mu_minority.shape[0]

    @property
    def mahalanobis(self):
        diff = self.mu_majority - self.mu_minority
        return float(np.sqrt(np.sum(diff * diff / self.covariance_diagonal)))

    def describe(self):
        return {"p": self.p, "delta": self.mahalanobis, "eta": self.priors.pi_majority / self.priors.pi_minority}


def make_gaussian_model(p, delta, covariance_profile="isotropic", eta=1.0):
    """Two Gaussian classes whose Mahalanobis distance is exactly ``delta``.

    ``covariance_profile`` is ``"isotropic"`` or a length-``p`` sequence of
    positive variances. The mean difference lies on the first axis, scaled by
    that axis' standard deviation.
    """
    p = int(p)
    if p < 1:
        raise DomainError("p must be >= 1")
    delta = float(delta)
    if not math.isfinite(delta) or delta <= 0:
        raise DomainError("delta must be finite and > 0")
    if isinstance(covariance_profile, str):
        if covariance_profile != "isotropic":
            raise DomainError(f"unknown covariance profile {covariance_profile!r}")
        var = np.ones(p)
    else:
        var = np.asarray(covariance_profile, dtype=np.float64)
        if var.shape != (p,):
            raise DomainError(f"diagonal covariance needs {p} entries, got shape {var.shape}")
        if not np.all(np.isfinite(var)) or np.any(var <= 0):
            raise DomainError("covariance entries must be finite and > 0")
    offset = 0.5 * delta * math.sqrt(var[0])
    mu_min = np.zeros(p)
    mu_maj = np.zeros(p)
    mu_min[0] = -offset
    mu_maj[0] = offset
    return GaussianModel(mu_min, mu_maj, var, Priors.from_eta(eta))


# --- datasets ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray  # MINORITY = 0, MAJORITY = 1
    provenance: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def p(self):
        return self.features.shape[1]

    @property
    def n_minority(self):
        return int(np.count_nonzero(self.labels == MINORITY))

    @property
    def n_majority(self):
        return int(np.count_nonzero(self.labels == MAJORITY))


def minority_count(n_majority, eta):
    """``max(1, round(n_majority / eta))`` with halves rounded up."""
    return max(1, int(math.floor(n_majority / eta + 0.5)))


def _draw(model, cls, n, rng):
    mu = model.mu_minority if cls == MINORITY else model.mu_majority
    return mu + rng.standard_normal((n, model.p)) * np.sqrt(model.covariance_diagonal)


def generate_dataset(model, n_majority, eta, seed, split=0):
    """Sample a dataset with ``n_majority`` majority rows at imbalance ``eta``.

    The minority rows are the first ``round(n_majority / eta)`` of a
    ``n_majority``-row pool, so datasets at different eta with the same seed
    are nested subsamples of one balanced draw. ``split`` separates
    independent draws (e.g. train vs test) under one seed.
    """
    n_majority = int(n_majority)
    if n_majority < 1:
        raise DomainError("n_majority must be >= 1")
    eta = float(eta)
    if not math.isfinite(eta) or eta < 1:
        raise DomainError("eta must be finite and >= 1")
    n_min = minority_count(n_majority, eta)
    x_maj = _draw(model, MAJORITY, n_majority, stream(seed, _TASK_FEATURES, split, MAJORITY))
    x_min = _draw(model, MINORITY, n_majority, stream(seed, _TASK_FEATURES, split, MINORITY))[:n_min]
    features = np.vstack([x_min, x_maj])
    labels = np.concatenate([np.full(n_min, MINORITY, dtype=np.int8), np.full(n_majority, MAJORITY, dtype=np.int8)])
    order = stream(seed, _TASK_SHUFFLE, split).permutation(features.shape[0])
    provenance = {
        "seed": int(seed),
        "split": int(split),
        "eta": eta,
        "n_majority": n_majority,
        "n_minority": n_min,
        "p": model.p,
        "delta": model.mahalanobis,
    }
    return Dataset(features[order], labels[order], provenance)


def population_bayes_classify(features, model, eta):
    """Bayes labels from the true parameters; ties go to the majority class."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != model.p:
        raise InputError(f"expected features with {model.p} columns, got shape {x.shape}")
    eta = float(eta)
    if not math.isfinite(eta) or eta < 1:
        raise DomainError("eta must be finite and >= 1")
    diff = model.mu_majority - model.mu_minority
    w = diff / model.covariance_diagonal
    bias = 0.5 * float(np.dot(model.mu_majority + model.mu_minority, w))
    g = x @ w - bias + math.log(eta)
    return np.where(g >= 0.0, MAJORITY, MINORITY).astype(np.int8)


# --- CSV export ------------------------------------------------------------------

def write_dataset_csv(dataset, path):
    """Write ``feature_0..feature_{p-1},label`` rows (label 0 = minority)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"feature_{j}" for j in range(dataset.p)] + ["label"])
        for row, lab in zip(dataset.features, dataset.labels):
            writer.writerow([f"{v:.9g}" for v in row] + [int(lab)])


def read_dataset_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        if not header or header[-1] != "label" or any(h != f"feature_{j}" for j, h in enumerate(header[:-1])):
            raise InputError(f"{path}: header must be feature_0,...,feature_{{p-1}},label")
        p = len(header) - 1
        if p < 1:
            raise InputError(f"{path}: no feature columns")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != p + 1:
                raise InputError(f"{path}:{lineno}: expected {p + 1} fields, got {len(row)}")
            rows.append(row)
    if not rows:
        raise InputError(f"{path}: no data rows")
    try:
        arr = np.array(rows, dtype=np.float64)
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric field ({exc})") from None
    labels = arr[:, -1]
    if not np.all(np.isin(labels, (MINORITY, MAJORITY))):
        raise InputError(f"{path}: labels must be 0 (minority) or 1 (majority)")
    if not np.all(np.isfinite(arr[:, :-1])):
        raise InputError(f"{path}: non-finite feature values")
    return Dataset(arr[:, :-1], labels.astype(np.int8), {"source": str(path)})
