"""Command-line entry point: ``imbalance-landscape <command> [options]``.

Every command writes CSV with a header row and numbers at 9 significant
digits, to ``--out`` or to standard output. Exit codes: 0 success, 1 usage
error, 2 validation failure, 3 I/O error.
"""

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .classifiers import estimate_triplet
from .errors import DomainError, InputError, LandscapeError, UnfitError
from .experiment import _write, curves_to_csv, degradation_curves, fmt, load_config, rows_to_csv, run_experiment
from .gridspec import parse_eta_grid, parse_lattice
from .landscape import (
    RegimeLabel,
    Target,
    TripletPoint,
    class_errors,
    classify_regimes,
    eta_max,
    error_curves,
    target_curve,
)
from .metrics import theoretical_metrics, theoretical_pr_curve
from .simulate import mc_class_errors, read_dataset_csv

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 1, 2, 3

DEFAULT_LATTICE = "eta=logspace(1,100,5);kappa=0.25,0.5,1,2,4;delta=0.5,1,2,3,4"

LANDSCAPE_HEADER = ["eta", "e_minority", "e_majority", "bayes_risk", "balanced_risk", "deterioration"]
REGIME_HEADER = ["eta", "slope", "normalized_slope", "regime", "eta_max"]
METRICS_HEADER = ["eta", "recall_min", "precision_min", "f1_min", "balanced_accuracy",
                  "balanced_error_rate", "cohen_kappa", "pr_auc_min"]
PR_HEADER = ["eta", "recall", "precision"]
VALIDATE_HEADER = ["eta", "kappa", "delta", "e_minority", "mc_minority", "half_width_minority", "pass_minority",
                   "e_majority", "mc_majority", "half_width_majority", "pass_majority"]


class UsageError(Exception):
    pass


class ValidationFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be a finite value > 0, got {text!r}")
    return v


def _eta_bound(text):
    v = _positive(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"eta must be >= 1, got {text!r}")
    return v


def _fraction(text):
    v = _positive(text)
    if v >= 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text!r}")
    return v


def _grid(text):
    try:
        return parse_eta_grid(text)
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _check_grid(grid):
    if len(grid) < 3:
        raise UsageError("the eta grid needs at least 3 points")
    return grid


# --- commands ----------------------------------------------------------------------

def cmd_landscape(args):
    if args.points < 3:
        raise UsageError("--points must be >= 3")
    if args.eta_max <= args.eta_min:
        raise UsageError("--eta-max must exceed --eta-min")
    etas = np.exp(np.linspace(math.log(args.eta_min), math.log(args.eta_max), args.points))
    etas[0], etas[-1] = args.eta_min, args.eta_max
    e_min, e_maj = error_curves(etas, args.kappa, args.delta)
    br = target_curve(etas, args.kappa, args.delta, Target.BAYES_RISK)
    ber = target_curve(etas, args.kappa, args.delta, Target.BALANCED_RISK)
    chosen = target_curve(etas, args.kappa, args.delta, args.target)
    base = target_curve(np.array([1.0]), args.kappa, args.delta, args.target)[0]
    rows = [[fmt(v) for v in r] for r in zip(etas, e_min, e_maj, br, ber, chosen - base)]
    _emit(_write(LANDSCAPE_HEADER, rows), args.out)


def cmd_regimes(args):
    grid = _check_grid(args.eta_grid)
    report = classify_regimes(args.kappa, args.delta, grid, args.target, args.tau1, args.tau2)
    rows = [[fmt(g.eta), fmt(g.slope), fmt(g.normalized_slope), g.label.value, fmt(report.eta_max)]
            for g in report.grid]
    _emit(_write(REGIME_HEADER, rows), args.out)


def cmd_metrics(args):
    rows, pr_rows = [], []
    for eta in args.eta_grid:
        point = TripletPoint(eta, args.kappa, args.delta)
        m = theoretical_metrics(point, with_pr_auc=True, evaluation_prevalence=args.evaluation_prevalence)
        rows.append([fmt(eta), fmt(m.recall_minority), fmt(m.precision_minority), fmt(m.f1_minority),
                     fmt(m.balanced_accuracy), fmt(m.balanced_error_rate), fmt(m.cohen_kappa),
                     fmt(m.pr_auc_minority)])
        if args.pr_curve:
            curve = theoretical_pr_curve(point, n_thresholds=args.pr_points,
                                         evaluation_prevalence=args.evaluation_prevalence)
            pr_rows.extend([fmt(eta), fmt(r), fmt(p)] for r, p in curve.points)
    _emit(_write(METRICS_HEADER, rows), args.out)
    if args.pr_curve:
        pr_path = args.pr_out
        if pr_path is None:
            if args.out is None:
                raise UsageError("--pr-curve needs --out or --pr-out")
            stem, ext = os.path.splitext(args.out)
            pr_path = f"{stem}_pr{ext or '.csv'}"
        _emit(_write(PR_HEADER, pr_rows), pr_path)


def cmd_validate(args):
    if args.samples < 1000:
        raise UsageError("--samples must be >= 1000")
    if not 0 < args.floor <= 1:
        raise UsageError("--floor must lie in (0, 1]")
    try:
        lattice = parse_lattice(args.lattice)
    except InputError as exc:
        raise UsageError(str(exc)) from None
    rows, passed, total = [], 0, 0
    task = 0
    for eta in lattice["eta"]:
        for kappa in lattice["kappa"]:
            for delta in lattice["delta"]:
                point = TripletPoint(eta, kappa, delta)
                exact = class_errors(point)
                e_min, e_maj = exact.e_minority, exact.e_majority
                mc_min, mc_maj = mc_class_errors(args.samples, point, args.seed, task=task)
                task += 1
                ok_min, ok_maj = mc_min.brackets(e_min), mc_maj.brackets(e_maj)
                passed += ok_min + ok_maj
                total += 2
                rows.append([fmt(eta), fmt(kappa), fmt(delta),
                             fmt(e_min), fmt(mc_min.estimate), fmt(mc_min.half_width_95), fmt(ok_min),
                             fmt(e_maj), fmt(mc_maj.estimate), fmt(mc_maj.half_width_95), fmt(ok_maj)])
    _emit(_write(VALIDATE_HEADER, rows), args.out)
    rate = passed / total
    print(f"pass rate {rate:.4f} ({passed}/{total} estimates bracketed, floor {args.floor:g})",
          file=sys.stderr if args.out is None else sys.stdout)
    if rate < args.floor:
        raise ValidationFailure(f"pass rate {rate:.4f} below floor {args.floor:g}")


def cmd_empirical(args):
    try:
        config = load_config(args.config)
    except OSError as exc:
        raise IOError(f"cannot read config: {exc}") from None
    out = args.out or config.output_path
    if out is None:
        raise UsageError("no results path: pass --out or set output_path in the config")
    summary = args.summary
    if summary is None:
        stem, ext = os.path.splitext(out)
        summary = f"{stem}_summary{ext or '.csv'}"
    rows = run_experiment(config)
    rows_to_csv(rows, out)
    curves_to_csv(degradation_curves(rows), summary)
    skipped = sum(r.skipped for r in rows)
    print(f"{len(rows)} rows ({skipped} skipped) -> {out}; summary -> {summary}")


def _audit_regime(eta_hat, kappa_hat, delta_hat):
    if delta_hat <= 0.0:
        # no separation: eta_max = 1 and any imbalance is catastrophic
        return 1.0, (RegimeLabel.CATASTROPHIC if eta_hat > 1.0 else RegimeLabel.NORMAL)
    limit = eta_max(kappa_hat, delta_hat)
    top = max(100.0, 2.0 * eta_hat, 2.0 * min(limit, 1e12))
    grid = np.unique(np.r_[np.exp(np.linspace(0.0, math.log(top), 400)), eta_hat])
    report = classify_regimes(kappa_hat, delta_hat, grid)
    idx = int(np.searchsorted(report.etas, eta_hat))
    return limit, report.grid[idx].label


def cmd_audit(args):
    try:
        data = read_dataset_csv(args.data)
        est = estimate_triplet(data)
    except (OSError, InputError, UnfitError) as exc:
        raise IOError(str(exc)) from None
    limit, label = _audit_regime(est.eta_hat, est.kappa_hat, est.delta_hat)
    headroom = est.eta_hat / limit
    fields = [("eta_hat", fmt(est.eta_hat)), ("kappa_hat", fmt(est.kappa_hat)), ("delta_hat", fmt(est.delta_hat)),
              ("eta_max", fmt(limit)), ("headroom", fmt(headroom)), ("regime", label.value)]
    if est.flipped:
        print("note: label 0 is the larger class; roles swapped so that eta_hat >= 1", file=sys.stderr)
    for k, v in fields:
        print(f"{k}: {v}")
    if args.out is not None:
        _emit(_write([k for k, _ in fields], [[v for _, v in fields]]), args.out)


# --- parser ------------------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="imbalance-landscape", description="Bayes-risk landscape of class imbalance.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    targets = [t.value for t in Target]

    def common(p, grid=True):
        p.add_argument("--kappa", type=_positive, required=True)
        p.add_argument("--delta", type=_positive, required=True)
        if grid:
            p.add_argument("--eta-grid", type=_grid, default=_grid("logspace(1,100,50)"),
                           help="comma list or logspace(min,max,points)")
        p.add_argument("--out", help="output CSV (default: standard output)")

    p = sub.add_parser("landscape", help="closed-form errors and risks over a log-spaced eta range")
    common(p, grid=False)
    p.add_argument("--eta-min", type=_eta_bound, default=1.0)
    p.add_argument("--eta-max", type=_eta_bound, default=100.0)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--target", choices=targets, default=Target.BALANCED_RISK.value,
                   help="quantity for the deterioration column")
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("regimes", help="deterioration slope and regime labels")
    common(p)
    p.add_argument("--target", choices=targets, default=Target.BALANCED_RISK.value)
    p.add_argument("--tau1", type=_fraction, default=0.1)
    p.add_argument("--tau2", type=_fraction, default=0.5)
    p.set_defaults(func=cmd_regimes)

    p = sub.add_parser("metrics", help="theoretical minority metrics")
    common(p)
    p.add_argument("--pr-curve", action="store_true", help="also write eta,recall,precision rows")
    p.add_argument("--pr-out", help="path for the PR curve file (default: <out>_pr.csv)")
    p.add_argument("--pr-points", type=int, default=2001)
    p.add_argument("--evaluation-prevalence", type=_fraction, default=None,
                   help="minority share of the evaluation population (default: the training prior)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("validate", help="Monte Carlo check of the closed-form errors")
    p.add_argument("--lattice", default=DEFAULT_LATTICE, help="eta=...;kappa=...;delta=...")
    p.add_argument("--samples", type=int, default=1_000_000, help="samples per class and cell")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--floor", type=float, default=0.9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("empirical", help="run the controlled-imbalance classifier experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="results CSV (default: output_path from the config)")
    p.add_argument("--summary", help="summary CSV (default: <out>_summary.csv)")
    p.set_defaults(func=cmd_empirical)

    p = sub.add_parser("audit", help="estimate (eta, kappa, delta) of a dataset and report its regime")
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ValidationFailure as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (UsageError, DomainError, InputError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, IOError) as exc:
        print(f"{parser.prog} {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except LandscapeError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
