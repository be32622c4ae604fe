"""Controlled-imbalance experiment: configuration, runner, CSV output, curves.

The majority training count is held fixed and the minority class is
subsampled to reach each eta, so every training set at a given seed is a
nested subsample of one balanced draw. By default the test set is balanced,
drawn once per seed and reused across eta.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .classifiers import MIN_PER_CLASS, ClassifierSpec, ConfusionMatrix, evaluate, fit
from .errors import DomainError, InputError, NumericError, UnfitError
from .metrics import MetricBundle
from .simulate import generate_dataset, make_gaussian_model

__all__ = [
    "ExperimentConfig",
    "ExperimentRow",
    "CurvePoint",
    "RESULT_HEADER",
    "CURVE_HEADER",
    "CONFIG_KEYS",
    "PROTOCOL_ETA_GRID",
    "run_experiment",
    "degradation_curves",
    "parse_config",
    "load_config",
    "rows_to_csv",
    "curves_to_csv",
    "fmt",
]

PROTOCOL_ETA_GRID = (1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 50.0, 100.0)

RESULT_HEADER = (
    "model,eta_nominal,eta_realized,seed,n_train_majority,n_train_minority,skipped,"
    "recall_min,precision_min,f1_min,pr_auc_min,cohen_kappa,balanced_accuracy,tn,fp,fn,tp"
).split(",")

CURVE_HEADER = ["model", "eta", "metric", "mean", "lo", "hi"]

# result-CSV column -> MetricBundle attribute
CURVE_METRICS = {
    "recall_min": "recall_minority",
    "precision_min": "precision_minority",
    "f1_min": "f1_minority",
    "pr_auc_min": "pr_auc_minority",
    "cohen_kappa": "cohen_kappa",
    "balanced_accuracy": "balanced_accuracy",
}

TEST_DESIGNS = ("balanced", "matched_imbalance")

CONFIG_KEYS = (
    "delta", "p", "n_majority_train", "n_test_per_class", "eta_grid", "seeds", "models",
    "knn_k", "logistic_l2", "logistic_max_iter", "logistic_tol", "test_design", "output_path",
)
_REQUIRED_KEYS = ("delta", "p", "n_majority_train", "n_test_per_class", "eta_grid", "seeds", "models")

# independent draw under a seed reserved for test sets
_TEST_SPLIT = 1


def fmt(value):
    """CSV number format: 9 significant digits, ints verbatim, None empty."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.9g}"


@dataclass(frozen=True)
class ExperimentConfig:
    delta: float
    p: int
    n_majority_train: int
    n_test_per_class: int
    eta_grid: tuple
    seeds: tuple
    models: tuple
    test_design: str = "balanced"
    output_path: Optional[str] = None

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise DomainError("delta must be > 0")
        for name in ("p", "n_majority_train", "n_test_per_class"):
            if int(getattr(self, name)) < 1:
                raise DomainError(f"{name} must be >= 1")
        grid = tuple(float(e) for e in self.eta_grid)
        if not grid or any(not math.isfinite(e) or e < 1 for e in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("eta_grid must be non-empty, strictly ascending and >= 1")
        object.__setattr__(self, "eta_grid", grid)
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds or any(s < 0 for s in seeds):
            raise DomainError("seeds must be a non-empty list of non-negative integers")
        object.__setattr__(self, "seeds", seeds)
        if not self.models:
            raise DomainError("models must be non-empty")
        object.__setattr__(self, "models", tuple(self.models))
        if self.test_design not in TEST_DESIGNS:
            raise DomainError(f"test_design must be one of {', '.join(TEST_DESIGNS)}")


@dataclass(eq=False)
class ExperimentRow:
    model: str
    eta_nominal: float
    eta_realized: float
    seed: int
    n_train_majority: int
    n_train_minority: int
    skipped: bool
    metrics: Optional[MetricBundle] = None
    confusion: Optional[ConfusionMatrix] = None
    kappa_realized: float = 0.0
    skip_reason: str = ""
    scores: Optional[np.ndarray] = field(default=None, repr=False)
    truth: Optional[np.ndarray] = field(default=None, repr=False)

    def csv_fields(self):
        m, cm = self.metrics, self.confusion
        values = [
            self.model, fmt(self.eta_nominal), fmt(self.eta_realized), fmt(self.seed),
            fmt(self.n_train_majority), fmt(self.n_train_minority), fmt(self.skipped),
        ]
        if m is None:
            return values + [""] * 10
        return values + [
            fmt(m.recall_minority), fmt(m.precision_minority), fmt(m.f1_minority), fmt(m.pr_auc_minority),
            fmt(m.cohen_kappa), fmt(m.balanced_accuracy), fmt(cm.tn), fmt(cm.fp), fmt(cm.fn), fmt(cm.tp),
        ]


def run_experiment(config):
    """Fit and evaluate every (model, eta, seed) cell of ``config``.

    Rows are returned in (model, eta, seed) order. Cells whose minority count
    falls below the family minimum, or whose fit fails, are kept as skipped
    rows.
    """
    gm = make_gaussian_model(config.p, config.delta)
    cells = {}
    for seed in config.seeds:
        balanced_test = None
        if config.test_design == "balanced":
            balanced_test = generate_dataset(gm, config.n_test_per_class, 1.0, seed, split=_TEST_SPLIT)
        for eta in config.eta_grid:
            train = generate_dataset(gm, config.n_majority_train, eta, seed)
            test = balanced_test or generate_dataset(gm, config.n_test_per_class, eta, seed, split=_TEST_SPLIT)
            for spec in config.models:
                cells[(spec.name, eta, seed)] = _run_cell(spec, train, test, eta, seed)

    rows = []
    for spec in config.models:
        for eta in config.eta_grid:
            for seed in config.seeds:
                rows.append(cells[(spec.name, eta, seed)])
    return rows


def _run_cell(spec, train, test, eta, seed):
    n_maj, n_min = train.n_majority, train.n_minority
    row = ExperimentRow(
        model=spec.name, eta_nominal=eta, eta_realized=n_maj / n_min, seed=seed,
        n_train_majority=n_maj, n_train_minority=n_min, skipped=False,
        kappa_realized=train.n / train.p,
    )
    if n_min < MIN_PER_CLASS[spec.family]:
        row.skipped = True
        row.skip_reason = f"{n_min} minority samples < {MIN_PER_CLASS[spec.family]}"
        return row
    try:
        model = fit(spec, train)
    except (UnfitError, NumericError) as exc:
        row.skipped = True
        row.skip_reason = str(exc)
        return row
    scores = model.predict_scores(test.features)
    predicted = model.predict(test.features)
    row.metrics, row.confusion = evaluate(scores, predicted, test.labels)
    row.scores, row.truth = scores, np.asarray(test.labels)
    return row


class CurvePoint(NamedTuple):
    model: str
    eta: float
    metric: str
    mean: float
    lo: float
    hi: float


def degradation_curves(rows):
    """Mean and min/max band over seeds for each (model, eta, metric).

    Skipped rows are ignored; metrics that are undefined in every seed of a
    cell (e.g. PR-AUC) are omitted.
    """
    rows = list(rows)
    if not rows:
        raise InputError("no experiment rows")
    models = list(dict.fromkeys(r.model for r in rows))
    grouped = {}
    for r in rows:
        if not r.skipped:
            grouped.setdefault((r.model, r.eta_nominal), []).append(r.metrics)
    out = []
    for model in models:
        etas = sorted({eta for (m, eta) in grouped if m == model})
        if len(etas) < 2:
            raise InputError(f"model {model!r} has fewer than 2 evaluated eta values")
        for eta in etas:
            bundles = grouped[(model, eta)]
            for column, attr in CURVE_METRICS.items():
                vals = [getattr(b, attr) for b in bundles if getattr(b, attr) is not None]
                if not vals:
                    continue
                out.append(CurvePoint(model, eta, column, float(np.mean(vals)), float(min(vals)), float(max(vals))))
    return out


# --- CSV ----------------------------------------------------------------------

def _write(header, records, path=None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(records)
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def rows_to_csv(rows, path=None):
    return _write(RESULT_HEADER, (r.csv_fields() for r in rows), path)


def curves_to_csv(curves, path=None):
    return _write(CURVE_HEADER, ([c.model, fmt(c.eta), c.metric, fmt(c.mean), fmt(c.lo), fmt(c.hi)] for c in curves), path)


# --- config files -----------------------------------------------------------------

def _split_list(key, text):
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise InputError(f"config key {key!r}: empty list")
    return items


def _number(key, text, kind=float):
    try:
        value = kind(text)
    except ValueError:
        raise InputError(f"config key {key!r}: cannot parse {text!r} as {kind.__name__}") from None
    return value


def _eta_grid(key, text):
    from .gridspec import parse_eta_grid

    try:
        return parse_eta_grid(text)
    except (InputError, DomainError) as exc:
        raise InputError(f"config key {key!r}: {exc}") from None


def parse_config(text):
    """Parse the flat ``key = value`` experiment config format.

    Blank lines and ``#`` comments are ignored; lists are comma-separated.
    Errors name the offending key.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else (":" if ":" in line else None)
        if sep is None:
            raise InputError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split(sep, 1))
        if key not in CONFIG_KEYS:
            raise InputError(f"config key {key!r} is not recognised")
        if key in raw:
            raise InputError(f"config key {key!r} given twice")
        raw[key] = value
    for key in _REQUIRED_KEYS:
        if key not in raw or not raw[key]:
            raise InputError(f"config key {key!r} is missing")

    knn_k = _number("knn_k", raw.get("knn_k", "5"), int)
    l2 = _number("logistic_l2", raw.get("logistic_l2", "1.0"))
    max_iter = _number("logistic_max_iter", raw.get("logistic_max_iter", "100"), int)
    tol = _number("logistic_tol", raw.get("logistic_tol", "1e-8"))
    models = []
    for fam in _split_list("models", raw["models"]):
        try:
            models.append(ClassifierSpec(fam, l2_strength=l2, max_iterations=max_iter, tolerance=tol, k=knn_k))
        except DomainError as exc:
            raise InputError(f"config key 'models': {exc}") from None

    def checked(key, build):
        try:
            return build()
        except DomainError as exc:
            raise InputError(f"config key {key!r}: {exc}") from None

    delta = _number("delta", raw["delta"])
    p = _number("p", raw["p"], int)
    n_maj = _number("n_majority_train", raw["n_majority_train"], int)
    n_test = _number("n_test_per_class", raw["n_test_per_class"], int)
    grid = _eta_grid("eta_grid", raw["eta_grid"])
    seeds = tuple(_number("seeds", s, int) for s in _split_list("seeds", raw["seeds"]))
    design = raw.get("test_design", "balanced")
    for key, ok in (("delta", math.isfinite(delta) and delta > 0), ("p", p >= 1),
                    ("n_majority_train", n_maj >= 1), ("n_test_per_class", n_test >= 1),
                    ("seeds", all(s >= 0 for s in seeds)), ("test_design", design in TEST_DESIGNS)):
        if not ok:
            raise InputError(f"config key {key!r}: invalid value {raw.get(key, design)!r}")
    return checked("config", lambda: ExperimentConfig(
        delta=delta, p=p, n_majority_train=n_maj, n_test_per_class=n_test, eta_grid=tuple(grid),
        seeds=seeds, models=tuple(models), test_design=design, output_path=raw.get("output_path") or None,
    ))


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())
