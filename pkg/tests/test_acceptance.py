"""One test per acceptance criterion; each records a PASS/FAIL/NOT RUN line.

Criteria 1-6 need the full Kaggle malicious-URL CSV (``malicious_phish.csv``)
at ``$URLSIFT_CORPUS``; without it they are reported as NOT RUN and skipped.
"""

import io
import itertools
import math
import os
import socket

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, fast_config
from urlsift.cli import main, predict_lines
from urlsift.config import LogRegConfig, TrainConfig
from urlsift.dataset import load_csv
from urlsift.experiment import Check, check_criteria, run_comparison
from urlsift.features import IdfWeights, SparseVector, fit_idf, tfidf_transform
from urlsift.linear import nb_predict_log_proba, train_logreg, train_multinomial_nb
from urlsift.metrics import classification_report, confusion_matrix
from urlsift.mlp import gradient_check, init_mlp, train_mlp
from urlsift.pipeline import train_bundle
from urlsift.serve import BackgroundServer
from urlsift.store import load_bundle, save_bundle

CORPUS = os.environ.get("URLSIFT_CORPUS")


def record(check: Check):
    ACCEPTANCE_LINES.append(check.line())
    print(check.line())
    assert check.passed, check.line()


# -- full-corpus comparison ---------------------------------------------------

CORPUS_NAMES = {
    1: "LogReg accuracy within 0.03 of 0.9326",
    2: "MLP accuracy within 0.02 of 0.9635 and above LogReg",
    3: "phishing precision gain MLP - LogReg >= 0.10",
    4: "phishing recall >= 0.85 for both models",
    5: "benign->phishing errors MLP <= 0.65 x LogReg",
    6: "benign/defacement/malware metrics within 0.03 of reference",
}


@pytest.fixture(scope="module")
def corpus_checks():
    if not CORPUS:
        return None
    results = run_comparison(load_csv(CORPUS))
    return {c.number: c for c in check_criteria(results)}


@pytest.mark.corpus
@pytest.mark.parametrize("number", sorted(CORPUS_NAMES))
def test_corpus_criterion(number, corpus_checks):
    if corpus_checks is None:
        line = f"[NOT RUN] criterion {number}: {CORPUS_NAMES[number]} -- set URLSIFT_CORPUS to the Kaggle CSV"
        ACCEPTANCE_LINES.append(line)
        pytest.skip(line)
    record(corpus_checks[number])


# -- desk-scale criteria -------------------------------------------------------

def test_criterion_7_gradient_check():
    worst = 0.0
    rng = np.random.default_rng(77)
    for seed in range(5):
        params = init_mlp((5, 3, 4), seed)
        for label in range(4):
            idx = np.sort(rng.choice(5, size=int(rng.integers(1, 6)), replace=False))
            x = SparseVector(5, idx, rng.normal(size=idx.size) + 0.1)
            worst = max(worst, gradient_check(params, x, label, epsilon=1e-5, atol=1e-8))
    record(Check(7, "MLP gradient check on 5-3-4 below 1e-4", worst < 1e-4, f"max relative error {worst:.2e}"))


def brute_force_nb(rows, labels, x, alpha):
    """Posterior over classes by explicit product of per-token probabilities."""
    n_feat = len(x)
    joint = []
    for c in range(4):
        mine = [r for r, y in zip(rows, labels) if y == c]
        totals = [sum(r[j] for r in mine) for j in range(n_feat)]
        denom = sum(totals) + alpha * n_feat
        p = len(mine) / len(rows)
        for j in range(n_feat):
            for _ in range(int(x[j])):
                p *= (totals[j] + alpha) / denom
        joint.append(p)
    z = sum(joint)
    return [p / z for p in joint]


def dense(row):
    return SparseVector.from_pairs(len(row), [(j, v) for j, v in enumerate(row) if v])


def test_criterion_8_nb_oracle():
    rng = np.random.default_rng(88)
    worst = 0.0
    for _ in range(300):
        n_feat, n = int(rng.integers(1, 4)), int(rng.integers(4, 7))
        rows = rng.integers(0, 4, size=(n, n_feat)).astype(float).tolist()
        labels = [0, 1, 2, 3] + rng.integers(0, 4, size=n - 4).tolist()
        x = rng.integers(0, 4, size=n_feat).astype(float).tolist()
        alpha = float(rng.uniform(0.1, 2.0))
        model = train_multinomial_nb([dense(r) for r in rows], labels, alpha)
        got = np.exp(nb_predict_log_proba(model, dense(x)))
        worst = max(worst, float(np.max(np.abs(got - brute_force_nb(rows, labels, x, alpha)))))
    record(Check(8, "multinomial NB equals brute-force enumeration within 1e-9", worst <= 1e-9,
                 f"max posterior gap {worst:.2e} over 300 instances"))


def test_criterion_9_tfidf_fixtures():
    got = [
        round(float(fit_idf([SparseVector(1, [0], [1.0])]).weights[0]), 4),
        *[round(float(w), 4) for w in fit_idf([SparseVector(2, [0], [1.0]), SparseVector.zeros(2),
                                               SparseVector.zeros(2)]).weights],
        *[round(v, 4) for _, v in tfidf_transform(SparseVector(2, [0, 1], [2.0, 1.0]), IdfWeights(np.ones(2))).pairs()],
        *[round(v, 4) for _, v in tfidf_transform(SparseVector(1, [0], [3.0]), IdfWeights([2.0])).pairs()],
    ]
    want = [1.0, 1.6931, 2.3863, 0.8944, 0.4472, 1.0]
    zero_ok = tfidf_transform(SparseVector.zeros(3), IdfWeights(np.ones(3))) == SparseVector.zeros(3)
    record(Check(9, "TF-IDF hand fixtures match to 4 d.p.", got == want and zero_ok, f"got {got}"))


def brute_force_report(y_true, y_pred):
    rows = []
    for c in range(4):
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == c and p != c)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        rows.append((prec, rec, f1, tp + fn))
    return rows


def test_criterion_10_report_recount():
    rng = np.random.default_rng(1010)
    mismatches, weighted_ok = 0, True
    for _ in range(100):
        n = int(rng.integers(1, 200))
        y_true = rng.integers(0, 4, n)
        y_pred = np.where(rng.random(n) < 0.7, y_true, rng.integers(0, 4, n))
        rep = classification_report(confusion_matrix(y_true, y_pred))
        for c, (p, r, f, s) in enumerate(brute_force_report(y_true.tolist(), y_pred.tolist())):
            if not (math.isclose(rep.precision[c], p, abs_tol=1e-12) and math.isclose(rep.recall[c], r, abs_tol=1e-12)
                    and math.isclose(rep.f1[c], f, abs_tol=1e-12) and rep.support[c] == s):
                mismatches += 1
        weighted_ok &= rep.weighted_avg[1] == rep.accuracy
    record(Check(10, "classification report equals brute-force recount; weighted recall == accuracy",
                 mismatches == 0 and weighted_ok, f"{mismatches} mismatching class rows, weighted recall ok: {weighted_ok}"))


def xor_fixture(copies=5):
    rng = np.random.default_rng(0)
    centres = {0: [(1, 1), (-1, -1)], 1: [(1, -1), (-1, 1)], 2: [(2, 0), (-2, 0)], 3: [(0, 2), (0, -2)]}
    X, y = [], []
    for c, pts in centres.items():
        for (a, b), _ in itertools.product(pts, range(copies)):
            d = rng.normal(scale=0.05, size=2)
            X.append(SparseVector(2, [0, 1], [a + d[0], b + d[1]]))
            y.append(c)
    return X, np.array(y)


def test_criterion_11_xor():
    X, y = xor_fixture()
    mlp = train_mlp(X, y, TrainConfig(hidden=(16,), learning_rate=0.5, epochs=300, batch_size=8, patience=0, seed=1))
    lr = train_logreg(X, y, LogRegConfig(learning_rate=0.5, epochs=300, batch_size=8))
    acc_mlp = float((mlp.params.predict(X) == y).mean())
    acc_lr = float((lr.predict(X) == y).mean())
    record(Check(11, "XOR fixture: MLP train accuracy 1.0, LogReg below 1.0", acc_mlp == 1.0 and acc_lr < 1.0,
                 f"mlp {acc_mlp:.3f}, logreg {acc_lr:.3f}"))


def test_criterion_12_determinism(tmp_path, fixture_csv, fixture_dataset):
    flags = ["--model", "mlp", "--seed", "42", "--epochs", "20", "--batch-size", "32", "--lr", "0.2", "--hidden", "32"]
    reports = []
    for i in range(2):
        bundle = tmp_path / f"run{i}.usft"
        assert main(["train", "--data", str(fixture_csv), "--out", str(bundle), *flags], out=io.StringIO()) == 0
        buf = io.StringIO()
        assert main(["evaluate", "--bundle", str(bundle), "--data", str(fixture_csv)], out=buf) == 0
        reports.append(buf.getvalue())
    same_report = reports[0] == reports[1]

    run = train_bundle(fixture_dataset, fast_config("mlp"))
    save_bundle(run.bundle, tmp_path / "rt.usft")
    before = run.bundle.predict_proba(fixture_dataset.urls)
    after = load_bundle(tmp_path / "rt.usft").predict_proba(fixture_dataset.urls)
    same_preds = np.array_equal(before, after)
    record(Check(12, "byte-identical reports across runs; bundle round-trip preserves predictions",
                 same_report and same_preds, f"reports identical: {same_report}, predictions identical: {same_preds}"))


def test_criterion_13_serve_predict_agreement(trained_runs, fixture_dataset):
    bundle = trained_runs["mlp"].bundle
    rng = np.random.default_rng(13)
    urls = [fixture_dataset.urls[i] for i in rng.choice(len(fixture_dataset), size=1000, replace=False)]
    via_predict = [line.split("\t", 1)[1] for line in predict_lines(bundle, urls)]
    with BackgroundServer(bundle) as srv, socket.create_connection(("127.0.0.1", srv.port), timeout=30) as s:
        s.sendall(("\n".join(urls) + "\n").encode())
        s.shutdown(socket.SHUT_WR)
        data = b"".join(iter(lambda: s.recv(65536), b""))
    via_serve = data.decode().splitlines()
    agree = sum(a == b for a, b in zip(via_predict, via_serve))
    record(Check(13, "serve and predict agree on 1000 random fixture URLs",
                 len(via_serve) == 1000 and agree == 1000, f"{agree}/1000 identical, {len(via_serve)} responses"))
