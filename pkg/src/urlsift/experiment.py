"""LogReg vs MLP comparison on one shared split of the full malicious-URL corpus.

Used by ``scripts/reproduce_comparison.py`` and the acceptance suite. The
reference figures are the published per-class tables for the Kaggle
malicious-URL corpus (benign, defacement, malware, phishing order).
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, replace

from urlsift.config import RunConfig
from urlsift.dataset import ClassLabel, LabeledDataset
from urlsift.metrics import ClassificationReport, ConfusionMatrix
from urlsift.pipeline import TrainRun, evaluate_predictions, train_bundle

log = logging.getLogger(__name__)

# (precision, recall, f1) per class
REFERENCE = {
    "logreg": {"accuracy": 0.9326,
               "benign": (0.98, 0.94, 0.96), "defacement": (1.00, 0.91, 0.95),
               "malware": (0.95, 0.99, 0.97), "phishing": (0.64, 0.92, 0.75)},
    "mlp": {"accuracy": 0.9635,
            "benign": (0.98, 0.97, 0.97), "defacement": (1.00, 0.99, 1.00),
            "malware": (0.96, 0.98, 0.97), "phishing": (0.85, 0.90, 0.87)},
}
METRIC_NAMES = ("precision", "recall", "f1")

BENIGN, PHISHING = int(ClassLabel.BENIGN), int(ClassLabel.PHISHING)


@dataclass
class ModelResult:
    run: TrainRun
    confusion: ConfusionMatrix
    report: ClassificationReport
    seconds: float


@dataclass(frozen=True)
class Check:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number}: {self.name} -- {self.detail}"


def run_model(dataset: LabeledDataset, cfg: RunConfig, kind: str) -> ModelResult:
    t0 = time.perf_counter()
    run = train_bundle(dataset, replace(cfg, model=kind))
    pred = run.bundle.predict_proba(run.test.urls).argmax(axis=1)
    cm, report = evaluate_predictions(run.test.labels, pred)
    seconds = time.perf_counter() - t0
    log.info("%s: accuracy %.4f in %.1fs", kind, report.accuracy, seconds)
    return ModelResult(run, cm, report, seconds)


def run_comparison(dataset: LabeledDataset, cfg: RunConfig | None = None) -> dict[str, ModelResult]:
    cfg = cfg or RunConfig()
    return {kind: run_model(dataset, cfg, kind) for kind in ("logreg", "mlp")}


def check_criteria(results: dict[str, ModelResult]) -> list[Check]:
    lr, mlp = results["logreg"], results["mlp"]
    acc_lr, acc_mlp = lr.report.accuracy, mlp.report.accuracy
    checks = [
        Check(1, "LogReg accuracy within 0.03 of 0.9326", abs(acc_lr - 0.9326) <= 0.03, f"accuracy {acc_lr:.4f}"),
        Check(2, "MLP accuracy within 0.02 of 0.9635 and above LogReg",
              abs(acc_mlp - 0.9635) <= 0.02 and acc_mlp > acc_lr, f"mlp {acc_mlp:.4f}, logreg {acc_lr:.4f}"),
    ]
    gain = mlp.report.precision[PHISHING] - lr.report.precision[PHISHING]
    checks.append(Check(3, "phishing precision gain MLP - LogReg >= 0.10", gain >= 0.10,
                        f"mlp {mlp.report.precision[PHISHING]:.4f}, logreg {lr.report.precision[PHISHING]:.4f}"))
    rec = {k: r.report.recall[PHISHING] for k, r in results.items()}
    checks.append(Check(4, "phishing recall >= 0.85 for both models", min(rec.values()) >= 0.85,
                        ", ".join(f"{k} {v:.4f}" for k, v in rec.items())))
    b2p_lr = int(lr.confusion.counts[BENIGN, PHISHING])
    b2p_mlp = int(mlp.confusion.counts[BENIGN, PHISHING])
    checks.append(Check(5, "benign->phishing errors MLP <= 0.65 x LogReg", b2p_mlp <= 0.65 * b2p_lr,
                        f"mlp {b2p_mlp}, logreg {b2p_lr}"))
    worst, where = 0.0, ""
    for kind, res in results.items():
        for name in ("benign", "defacement", "malware"):
            c = int(ClassLabel.parse(name))
            got = (res.report.precision[c], res.report.recall[c], res.report.f1[c])
            for metric, g, want in zip(METRIC_NAMES, got, REFERENCE[kind][name]):
                if abs(g - want) >= worst:
                    worst, where = abs(g - want), f"{kind} {name} {metric} {g:.4f} vs {want:.2f}"
    checks.append(Check(6, "benign/defacement/malware metrics within 0.03 of reference", worst <= 0.03,
                        f"largest gap {worst:.4f} ({where})"))
    return checks
