import csv

import numpy as np
import pytest

from imbalance_landscape.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main
from imbalance_landscape.simulate import Dataset, generate_dataset, make_gaussian_model, write_dataset_csv


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _run(argv):
    try:
        return main(argv)
    except SystemExit as exc:  # argparse usage errors
        return exc.code


# --- landscape -------------------------------------------------------------------------

def test_landscape_example(tmp_path):
    out = tmp_path / "l.csv"
    args = ["landscape", "--kappa", "1", "--delta", "2", "--eta-min", "1", "--eta-max", "100", "--points", "50",
            "--out", str(out)]
    assert _run(args) == EXIT_OK
    rows = _rows(out)
    assert len(rows) == 50
    assert list(rows[0]) == ["eta", "e_minority", "e_majority", "bayes_risk", "balanced_risk", "deterioration"]
    assert float(rows[0]["e_minority"]) == pytest.approx(0.158655254, abs=1e-9)
    assert float(rows[-1]["eta"]) == 100.0
    first = out.read_bytes()
    assert _run(args) == EXIT_OK
    assert out.read_bytes() == first


@pytest.mark.parametrize("extra", [["--points", "2"], ["--eta-min", "0.5"], ["--eta-min", "5", "--eta-max", "2"],
                                   ["--target", "nope"], ["--kappa", "-1"]])
def test_landscape_usage_errors(extra, capsys):
    base = {"--kappa": "1", "--delta": "2"}
    argv = ["landscape"]
    for k, v in base.items():
        if k not in extra:
            argv += [k, v]
    assert _run(argv + extra) == EXIT_USAGE


def test_landscape_stdout(capsys):
    assert _run(["landscape", "--kappa", "1", "--delta", "2", "--points", "3"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4


# --- regimes ---------------------------------------------------------------------------

def test_regimes_example(tmp_path):
    out = tmp_path / "r.csv"
    assert _run(["regimes", "--kappa", "1", "--delta", "2", "--eta-grid", "logspace(1,100,200)", "--out", str(out)]) == 0
    rows = _rows(out)
    assert {r["eta_max"] for r in rows} == {"7.3890561"}
    assert rows[0]["regime"] == "Normal"
    for r in rows:
        assert (r["regime"] == "Catastrophic") == (float(r["eta"]) > 7.38905609893065)
        assert 0.0 <= float(r["normalized_slope"]) <= 1.0


@pytest.mark.parametrize("taus", [("0.5", "0.2"), ("0.3", "0.3"), ("0", "0.5"), ("0.1", "1")])
def test_regimes_bad_taus(taus):
    assert _run(["regimes", "--kappa", "1", "--delta", "2", "--tau1", taus[0], "--tau2", taus[1]]) == EXIT_USAGE


def test_regimes_bad_grid():
    assert _run(["regimes", "--kappa", "1", "--delta", "2", "--eta-grid", "1,2"]) == EXIT_USAGE
    assert _run(["regimes", "--kappa", "1", "--delta", "2", "--eta-grid", "3,2,1"]) == EXIT_USAGE


# --- metrics ----------------------------------------------------------------------------

def test_metrics_example(tmp_path):
    out = tmp_path / "m.csv"
    assert _run(["metrics", "--kappa", "1", "--delta", "2", "--eta-grid", "1,10,1000,100000", "--pr-curve",
                 "--out", str(out)]) == 0
    rows = _rows(out)
    assert float(rows[0]["recall_min"]) == pytest.approx(0.841345, abs=1e-6)
    assert float(rows[0]["precision_min"]) == pytest.approx(0.841345, abs=1e-6)
    recalls = [float(r["recall_min"]) for r in rows]
    assert recalls == sorted(recalls, reverse=True) and recalls[-1] < 1e-3
    pr = _rows(tmp_path / "m_pr.csv")
    assert list(pr[0]) == ["eta", "recall", "precision"]
    first = [(float(r["recall"]), float(r["precision"])) for r in pr if r["eta"] == "1"]
    rec, prec = np.array(first).T
    auc = float(np.sum(np.diff(rec) * (prec[1:] + prec[:-1]) / 2))
    assert 0.5 <= auc <= 1.0
    assert auc == pytest.approx(float(rows[0]["pr_auc_min"]), abs=1e-6)


def test_metrics_pr_curve_needs_path(capsys):
    assert _run(["metrics", "--kappa", "1", "--delta", "2", "--pr-curve"]) == EXIT_USAGE


# --- validate ----------------------------------------------------------------------------

def test_validate_small_lattice(tmp_path):
    out = tmp_path / "v.csv"
    argv = ["validate", "--lattice", "eta=1,10;kappa=0.5,2;delta=1,3", "--samples", "20000", "--seed", "4",
            "--out", str(out)]
    assert _run(argv) == EXIT_OK
    rows = _rows(out)
    assert len(rows) == 8
    assert list(rows[0])[-1] == "pass_majority"
    first = out.read_bytes()
    assert _run(argv) == EXIT_OK
    assert out.read_bytes() == first


def test_validate_usage_and_failure(tmp_path):
    assert _run(["validate", "--samples", "10"]) == EXIT_USAGE
    assert _run(["validate", "--lattice", "eta=1;kappa=1", "--samples", "1000"]) == EXIT_USAGE
    # an unreachable floor turns into a validation failure
    code = _run(["validate", "--lattice", "eta=2;kappa=1;delta=1", "--samples", "1000", "--floor", "1.0",
                 "--seed", "0", "--out", str(tmp_path / "v.csv")])
    rows = _rows(tmp_path / "v.csv")
    all_pass = all(r["pass_minority"] == "1" and r["pass_majority"] == "1" for r in rows)
    assert code == (EXIT_OK if all_pass else EXIT_VALIDATION)


# --- empirical ----------------------------------------------------------------------------

CONFIG = """delta = 2
p = 10
n_majority_train = 100
n_test_per_class = 200
eta_grid = 1, 3, 10
seeds = 0, 1
models = logistic, lda, qda, gnb, knn
"""


def test_empirical_runs_and_is_deterministic(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(CONFIG)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert _run(["empirical", "--config", str(cfg), "--out", str(out1)]) == EXIT_OK
    assert _run(["empirical", "--config", str(cfg), "--out", str(out2)]) == EXIT_OK
    assert out1.read_bytes() == out2.read_bytes()
    assert (tmp_path / "a_summary.csv").read_bytes() == (tmp_path / "b_summary.csv").read_bytes()
    rows = _rows(out1)
    assert len(rows) == 3 * 2 * 5
    assert ",".join(rows[0]) == ("model,eta_nominal,eta_realized,seed,n_train_majority,n_train_minority,skipped,"
                                 "recall_min,precision_min,f1_min,pr_auc_min,cohen_kappa,balanced_accuracy,"
                                 "tn,fp,fn,tp")
    assert list(_rows(tmp_path / "a_summary.csv")[0]) == ["model", "eta", "metric", "mean", "lo", "hi"]


def test_empirical_output_path_from_config(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(CONFIG.replace("seeds = 0, 1", "seeds = 0") + f"output_path = {tmp_path / 'r.csv'}\n")
    assert _run(["empirical", "--config", str(cfg)]) == EXIT_OK
    assert (tmp_path / "r.csv").exists() and (tmp_path / "r_summary.csv").exists()


def test_empirical_missing_key_named(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("\n".join(l for l in CONFIG.splitlines() if not l.startswith("delta")))
    assert _run(["empirical", "--config", str(cfg), "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
    assert "'delta'" in capsys.readouterr().err


def test_empirical_io_errors(tmp_path):
    assert _run(["empirical", "--config", str(tmp_path / "none.cfg"), "--out", "x.csv"]) == EXIT_IO
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(CONFIG)
    assert _run(["empirical", "--config", str(cfg), "--out", str(tmp_path / "no" / "dir.csv")]) == EXIT_IO
    assert _run(["empirical", "--config", str(cfg)]) == EXIT_USAGE


# --- audit -----------------------------------------------------------------------------------

def _audit(path, capsys):
    code = _run(["audit", "--data", str(path)])
    out = capsys.readouterr().out
    return code, dict(line.split(": ", 1) for line in out.splitlines())


def test_audit_balanced(tmp_path, capsys):
    path = tmp_path / "d.csv"
    write_dataset_csv(generate_dataset(make_gaussian_model(20, 2.0), 5000, 1.0, seed=0), path)
    code, rep = _audit(path, capsys)
    assert code == EXIT_OK
    assert float(rep["eta_hat"]) == 1.0
    assert float(rep["kappa_hat"]) == 500.0
    assert float(rep["delta_hat"]) == pytest.approx(2.0, abs=0.1)
    assert rep["regime"] == "Normal"


def test_audit_counts_and_report_file(tmp_path, capsys):
    rng = np.random.default_rng(0)
    data = Dataset(rng.standard_normal((1000, 3)), np.r_[np.zeros(10), np.ones(990)].astype(np.int8))
    path = tmp_path / "d.csv"
    write_dataset_csv(data, path)
    code, rep = _audit(path, capsys)
    assert code == EXIT_OK and float(rep["eta_hat"]) == 99.0
    assert float(rep["headroom"]) == pytest.approx(99.0 / float(rep["eta_max"]), rel=1e-6)
    out = tmp_path / "a.csv"
    assert _run(["audit", "--data", str(path), "--out", str(out)]) == EXIT_OK
    assert list(_rows(out)[0]) == ["eta_hat", "kappa_hat", "delta_hat", "eta_max", "headroom", "regime"]


def test_audit_no_separation(tmp_path, capsys):
    data = Dataset(np.zeros((40, 2)), np.r_[np.zeros(10), np.ones(30)].astype(np.int8))
    path = tmp_path / "d.csv"
    write_dataset_csv(data, path)
    code, rep = _audit(path, capsys)
    assert code == EXIT_OK
    assert float(rep["delta_hat"]) == 0.0
    assert float(rep["eta_max"]) == 1.0
    assert rep["regime"] == "Catastrophic"


def test_audit_bad_files(tmp_path, capsys):
    assert _run(["audit", "--data", str(tmp_path / "missing.csv")]) == EXIT_IO
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert _run(["audit", "--data", str(bad)]) == EXIT_IO
    one = tmp_path / "one.csv"
    one.write_text("feature_0,label\n1,1\n2,1\n")
    assert _run(["audit", "--data", str(one)]) == EXIT_IO


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "imbalance_landscape.cli", "landscape", "--kappa", "1",
                          "--delta", "2", "--points", "3"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("eta,")


def test_numpy_fallback_gives_identical_outputs(tmp_path):
    import os
    import subprocess
    import sys

    cfg = tmp_path / "exp.cfg"
    cfg.write_text(CONFIG.replace("seeds = 0, 1", "seeds = 0"))
    outputs = []
    for flag in ("0", "1"):
        env = dict(os.environ, IMBALANCE_LANDSCAPE_DISABLE_NUMBA=flag)
        v = tmp_path / f"v{flag}.csv"
        e = tmp_path / f"e{flag}.csv"
        probe = "import imbalance_landscape as il; print(il.HAS_NUMBA)"
        has = subprocess.run([sys.executable, "-c", probe], env=env, capture_output=True, text=True).stdout.strip()
        assert has == ("False" if flag == "1" else "True")
        for argv in (["validate", "--lattice", "eta=1,20;kappa=1;delta=1,2", "--samples", "5000", "--out", str(v)],
                     ["empirical", "--config", str(cfg), "--out", str(e)]):
            res = subprocess.run([sys.executable, "-m", "imbalance_landscape.cli", *argv], env=env,
                                 capture_output=True, text=True)
            assert res.returncode == 0, res.stderr
        outputs.append((v.read_bytes(), e.read_bytes()))
    assert outputs[0] == outputs[1]
