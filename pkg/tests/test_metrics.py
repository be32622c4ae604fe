import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from imbalance_landscape import InputError
from imbalance_landscape.landscape import TripletPoint, class_errors, classify_regimes
from imbalance_landscape.metrics import (
    METRIC_NAMES,
    confusion_rates,
    metrics_from_counts,
    regime_summary,
    robustness_ratio,
    theoretical_metrics,
    theoretical_pr_curve,
)

points = st.builds(TripletPoint, st.floats(1.0, 1e5), st.floats(0.05, 10.0), st.floats(0.05, 6.0))


class TestConfusion:
    def test_balanced_values(self):
        r = confusion_rates(TripletPoint(1, 1, 2))
        assert r.tp == pytest.approx(0.420672373034, abs=1e-12)
        assert r.tn == pytest.approx(0.420672373034, abs=1e-12)
        assert r.fp == pytest.approx(0.079327626966, abs=1e-12)
        assert r.fn == pytest.approx(0.079327626966, abs=1e-12)

    @given(points)
    def test_marginals(self, p):
        r = confusion_rates(p)
        assert abs(r.tp + r.fp + r.fn + r.tn - 1.0) <= 1e-12
        assert abs(r.tp + r.fn - 1.0 / (1.0 + p.eta)) <= 1e-12
        assert abs(r.tn + r.fp - p.eta / (1.0 + p.eta)) <= 1e-12

    def test_perfect_separation(self):
        r = confusion_rates(TripletPoint(4, 1, 1e3))
        assert r.fp == 0.0 and r.fn == 0.0

    def test_balanced_evaluation(self):
        r = confusion_rates(TripletPoint(50, 1, 2), evaluation_prevalence=0.5)
        assert r.tp + r.fn == pytest.approx(0.5, abs=1e-15)
        with pytest.raises(InputError):
            confusion_rates(TripletPoint(50, 1, 2), evaluation_prevalence=1.0)


class TestTheoreticalMetrics:
    def test_balanced_values(self):
        m = theoretical_metrics(TripletPoint(1, 1, 2))
        for v in (m.recall_minority, m.precision_minority, m.f1_minority, m.balanced_accuracy):
            assert v == pytest.approx(0.841344746069, abs=1e-12)
        assert m.cohen_kappa == pytest.approx(0.682689492137, abs=1e-12)
        assert m.pr_auc_minority is None

    def test_extreme_imbalance_limit(self):
        m = theoretical_metrics(TripletPoint(1e200, 1, 2))
        assert m.recall_minority < 1e-12
        assert abs(m.cohen_kappa) < 1e-12

    @given(points)
    def test_recall_is_complement_of_minority_error(self, p):
        assert abs(theoretical_metrics(p).recall_minority - (1.0 - class_errors(p).e_minority)) <= 1e-15

    @given(points)
    def test_bounds_and_f1(self, p):
        m = theoretical_metrics(p)
        for name in ("recall_minority", "precision_minority", "f1_minority", "balanced_accuracy", "balanced_error_rate"):
            assert 0.0 <= getattr(m, name) <= 1.0
        assert -1.0 <= m.cohen_kappa <= 1.0
        r, pr = m.recall_minority, m.precision_minority
        if r > 0 and pr > 0:
            assert abs(m.f1_minority - 2 * r * pr / (r + pr)) <= 1e-12

    @given(st.floats(0.05, 10.0), st.floats(0.05, 6.0))
    def test_kappa_at_balance(self, kappa, delta):
        p = TripletPoint(1, kappa, delta)
        e = class_errors(p).e_minority
        assert abs(theoretical_metrics(p).cohen_kappa - (1 - 2 * e)) <= 1e-12

    def test_recall_strictly_decreasing(self):
        grid = np.logspace(0, 3, 400)
        rec = [theoretical_metrics(TripletPoint(e, 1, 2)).recall_minority for e in grid]
        assert np.all(np.diff(rec) < 0)

    def test_population_precision_is_not_monotone(self):
        # at the training prevalence the falling base rate outweighs the boundary shift near eta = 1
        a = theoretical_metrics(TripletPoint(1, 1, 2)).precision_minority
        b = theoretical_metrics(TripletPoint(2, 1, 2)).precision_minority
        assert b < a

    @pytest.mark.parametrize("kappa,delta", [(1, 2), (0.25, 0.5), (4, 4), (1, 1)])
    def test_balanced_precision_rises_while_predictions_remain(self, kappa, delta):
        grid = np.logspace(0, 8, 3000)
        bundles = [theoretical_metrics(TripletPoint(e, kappa, delta), evaluation_prevalence=0.5) for e in grid]
        prec = np.array([b.precision_minority for b in bundles])
        live = np.array([not b.precision_undefined for b in bundles])
        n_live = np.argmin(live) if not live.all() else len(live)
        assert live[:n_live].all() and not live[n_live:].any()
        assert np.all(np.diff(prec[:n_live]) >= 0)

    def test_zero_predicted_positives_flagged(self):
        m = theoretical_metrics(TripletPoint(1e8, 0.25, 0.5))
        assert m.precision_undefined
        assert m.precision_minority == 0.0 and m.f1_minority == 0.0


class TestCounts:
    def test_perfect(self):
        m = metrics_from_counts(10, 0, 0, 90)
        assert m.recall_minority == m.precision_minority == m.f1_minority == m.balanced_accuracy == m.cohen_kappa == 1.0

    def test_all_majority(self):
        m = metrics_from_counts(0, 0, 10, 90)
        assert m.recall_minority == 0.0
        assert m.balanced_accuracy == 0.5
        assert m.cohen_kappa == 0.0
        assert m.precision_undefined

    def test_rejects_negative(self):
        with pytest.raises(InputError):
            metrics_from_counts(-1, 0, 1, 1)


def quad_auc(eta, kappa, delta):
    # independent oracle: integrate precision against the recall density
    from scipy import integrate
    from scipy.stats import norm

    d = delta * math.sqrt(kappa)
    h = d * d / 2
    q = 1 / (1 + eta)

    def f(c):
        r = norm.cdf((h - c) / d)
        fp = norm.cdf((-h - c) / d)
        den = q * r + (1 - q) * fp
        return (q * r / den if den > 0 else 1.0) * norm.pdf((h - c) / d) / d

    return integrate.quad(f, -h - 40 * d, h + 40 * d, limit=500, epsabs=1e-13, points=[-h, h])[0]


class TestPrCurve:
    @pytest.mark.parametrize("eta,kappa,delta,frozen", [
        (1, 1, 2, 0.9217682613031509),
        (10, 1, 2, 0.6480692919245247),
        (100, 1, 2, 0.2676354758676253),
        (3, 0.5, 1, 0.42807383129214555),
    ])
    def test_auc_against_quadrature(self, eta, kappa, delta, frozen):
        assert quad_auc(eta, kappa, delta) == pytest.approx(frozen, abs=1e-10)
        assert theoretical_pr_curve(TripletPoint(eta, kappa, delta)).auc == pytest.approx(frozen, abs=1e-5)

    def test_curve_shape(self):
        c = theoretical_pr_curve(TripletPoint(5, 1, 2), n_thresholds=101)
        rec = np.array([r for r, _ in c.points])
        assert len(c.points) == 101
        assert np.all(np.diff(rec) >= 0)
        assert rec[0] < 1e-6 and rec[-1] > 1 - 1e-6

    def test_limits(self):
        assert theoretical_pr_curve(TripletPoint(3, 1, 30)).auc == pytest.approx(1.0, abs=1e-6)
        assert theoretical_pr_curve(TripletPoint(3, 1, 1e-4)).auc == pytest.approx(0.25, abs=1e-3)

    def test_auc_drops_with_imbalance(self):
        assert theoretical_pr_curve(TripletPoint(1, 1, 2)).auc > theoretical_pr_curve(TripletPoint(10, 1, 2)).auc
        aucs = [theoretical_pr_curve(TripletPoint(e, 0.5, 1.5)).auc for e in np.logspace(0, 5, 40)]
        assert np.all(np.diff(aucs) < 0)

    @given(points)
    def test_auc_bounds(self, p):
        auc = theoretical_pr_curve(p).auc
        pi_min = 1 / (1 + p.eta)
        assert pi_min * (1 - 1e-6) <= auc <= 1.0

    @pytest.mark.parametrize("p", [TripletPoint(1, 1, 2), TripletPoint(100, 4, 0.7), TripletPoint(7, 0.1, 5)])
    def test_refinement_converges(self, p):
        assert abs(theoretical_pr_curve(p, 2001).auc - theoretical_pr_curve(p, 20001).auc) < 1e-4

    def test_too_few_thresholds(self):
        with pytest.raises(InputError):
            theoretical_pr_curve(TripletPoint(1, 1, 2), n_thresholds=10)

    def test_bundle_carries_auc(self):
        p = TripletPoint(10, 1, 2)
        assert theoretical_metrics(p, with_pr_auc=True).pr_auc_minority == theoretical_pr_curve(p).auc


class TestRegimeSummary:
    def _setup(self, kappa=1, delta=2, grid=None):
        grid = np.logspace(0, 2, 200) if grid is None else grid
        rep = classify_regimes(kappa, delta, grid)
        return rep, [TripletPoint(e, kappa, delta) for e in grid]

    def test_grouping_identity(self):
        # huge separation: numerically flat curve, every point Normal
        grid = [1.0, 1.5, 2.0, 3.0]
        rep, pts = self._setup(1, 80, grid)
        rows = regime_summary(rep, pts)
        assert {r.regime for r in rows} == {"Normal"}
        recall = [theoretical_metrics(p).recall_minority for p in pts]
        row = next(r for r in rows if r.metric_name == "recall_minority")
        assert row.mean == pytest.approx(np.mean(recall))
        assert len(rows) == len(METRIC_NAMES)

    def test_catastrophic_recall_below_normal(self):
        rep, pts = self._setup()
        rows = {(r.regime, r.metric_name): r for r in regime_summary(rep, pts)}
        assert rows[("Catastrophic", "recall_minority")].mean < rows[("Normal", "recall_minority")].mean

    def test_ba_medians_ordered(self):
        rep, pts = self._setup()
        rows = regime_summary(rep, pts)
        med = [r.median for r in rows if r.metric_name == "balanced_accuracy"]
        order = [r.regime for r in rows if r.metric_name == "balanced_accuracy"]
        assert order == ["Normal", "Mild", "Extreme", "Catastrophic"]
        assert med == sorted(med, reverse=True)

    def test_grid_mismatch(self):
        rep, pts = self._setup()
        with pytest.raises(InputError):
            regime_summary(rep, pts[:-1])
        pts[3] = TripletPoint(pts[3].eta * 1.01, 1, 2)
        with pytest.raises(InputError):
            regime_summary(rep, pts)


class TestRobustness:
    grid = np.logspace(0, 2, 30)

    def _theory(self):
        return [(e, theoretical_metrics(TripletPoint(e, 1, 2)).recall_minority) for e in self.grid]

    def test_self_ratio(self):
        rep = robustness_ratio(self._theory(), self._theory(), "bayes")
        assert rep.model_name == "bayes"
        assert all(g.rho == pytest.approx(1.0) for g in rep.grid if g.rho is not None)

    def test_constant_model(self):
        rep = robustness_ratio([(e, 0.7) for e in self.grid], self._theory())
        assert all(g.rho == 0.0 for g in rep.grid if g.rho is not None)

    def test_doubled_slope(self):
        theory = [(e, 1.0 - 0.1 * math.log(e)) for e in self.grid]
        model = [(e, 0.9 - 0.2 * math.log(e)) for e in self.grid]
        rep = robustness_ratio(model, theory)
        assert all(abs(g.rho - 2.0) < 1e-9 for g in rep.grid)

    def test_negligible_theory_slope_is_absent(self):
        rep = robustness_ratio([(e, e) for e in self.grid], [(e, 0.3) for e in self.grid])
        assert all(g.rho is None for g in rep.grid)

    def test_mismatched_grids(self):
        with pytest.raises(InputError):
            robustness_ratio([(1, 0), (2, 0), (3, 0)], [(1, 0), (2, 0), (4, 0)])
        with pytest.raises(InputError):
            robustness_ratio([(1, 0), (2, 0)], [(1, 0), (2, 0)])
