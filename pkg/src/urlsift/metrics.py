"""Confusion matrix and precision / recall / F1 report in the usual table layout."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from urlsift.dataset import CLASS_NAMES, N_CLASSES
from urlsift.errors import ConfigError, DataError

REPORT_FORMATS = ("text", "csv")


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """counts[i, j] = samples of true class i predicted as class j."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (N_CLASSES, N_CLASSES) or c.min() < 0:
            raise DataError("confusion matrix must be a non-negative 4x4 integer array")
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __getitem__(self, key):
        return self.counts[key]

    def __eq__(self, other):
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)

    def render_csv(self) -> str:
        lines = ["true\\pred," + ",".join(CLASS_NAMES)]
        for name, row in zip(CLASS_NAMES, self.counts.tolist()):
            lines.append(name + "," + ",".join(str(v) for v in row))
        return "\n".join(lines) + "\n"

    def render_text(self) -> str:
        width = max(max(len(n) for n in CLASS_NAMES), len(str(self.counts.max())))
        head = " " * width + "".join(f"  {n:>{width}}" for n in CLASS_NAMES)
        lines = [head]
        for name, row in zip(CLASS_NAMES, self.counts.tolist()):
            lines.append(f"{name:>{width}}" + "".join(f"  {v:>{width}d}" for v in row))
        return "\n".join(lines) + "\n"


def confusion_matrix(y_true, y_pred) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise DataError(f"label vectors differ in length: {y_true.size} vs {y_pred.size}")
    if y_true.size == 0:
        raise DataError("cannot build a confusion matrix from zero samples")
    for y in (y_true, y_pred):
        if y.min() < 0 or y.max() >= N_CLASSES:
            raise DataError("label code outside [0, 3]")
    flat = np.bincount(y_true * N_CLASSES + y_pred, minlength=N_CLASSES * N_CLASSES)
    return ConfusionMatrix(flat.reshape(N_CLASSES, N_CLASSES))


def _safe_div(num, den):
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den != 0)
    return out


@dataclass(frozen=True)
class ClassificationReport:
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    support: tuple[int, ...]
    accuracy: float
    macro_avg: tuple[float, float, float]
    weighted_avg: tuple[float, float, float]

    @property
    def total(self) -> int:
        return sum(self.support)

    def per_class(self, label) -> dict:
        c = int(label)
        return {"precision": self.precision[c], "recall": self.recall[c], "f1": self.f1[c], "support": self.support[c]}


def classification_report(cm: ConfusionMatrix) -> ClassificationReport:
    counts = cm.counts
    total = counts.sum()
    if total < 1:
        raise DataError("confusion matrix is empty")
    tp = np.diag(counts).astype(np.float64)
    support = counts.sum(axis=1)
    precision = _safe_div(tp, counts.sum(axis=0))
    recall = _safe_div(tp, support)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    weights = support / total
    avg = lambda v: float(np.mean(v))  # noqa: E731
    wavg = lambda v: float(np.dot(weights, v))  # noqa: E731
    # support-weighted recall is sum(tp) / total; computed that way so it
    # equals accuracy exactly instead of to rounding error
    weighted_recall = float(tp.sum() / total)
    return ClassificationReport(
        precision=tuple(precision.tolist()),
        recall=tuple(recall.tolist()),
        f1=tuple(f1.tolist()),
        support=tuple(int(s) for s in support),
        accuracy=float(tp.sum() / total),
        macro_avg=(avg(precision), avg(recall), avg(f1)),
        weighted_avg=(wavg(precision), weighted_recall, wavg(f1)),
    )


def _render_text(report: ClassificationReport) -> str:
    name_w = max(len("weighted avg"), *(len(n) for n in CLASS_NAMES))
    sup_w = max(len("support"), len(str(report.total)))
    head = f"{'':>{name_w}}  {'precision':>9}  {'recall':>9}  {'f1-score':>9}  {'support':>{sup_w}}"
    lines = [head, ""]
    for c, name in enumerate(CLASS_NAMES):
        lines.append(
            f"{name:>{name_w}}  {report.precision[c]:9.2f}  {report.recall[c]:9.2f}  "
            f"{report.f1[c]:9.2f}  {report.support[c]:>{sup_w}d}"
        )
    lines.append("")
    lines.append(f"{'accuracy':>{name_w}}  {'':>9}  {'':>9}  {report.accuracy:9.2f}  {report.total:>{sup_w}d}")
    for label, (p, r, f) in (("macro avg", report.macro_avg), ("weighted avg", report.weighted_avg)):
        lines.append(f"{label:>{name_w}}  {p:9.2f}  {r:9.2f}  {f:9.2f}  {report.total:>{sup_w}d}")
    return "\n".join(lines) + "\n"


def _render_csv(report: ClassificationReport) -> str:
    lines = ["class,precision,recall,f1,support"]
    for c, name in enumerate(CLASS_NAMES):
        lines.append(f"{name},{report.precision[c]:.6f},{report.recall[c]:.6f},{report.f1[c]:.6f},{report.support[c]}")
    lines.append(f"accuracy,,,{report.accuracy:.6f},{report.total}")
    for label, (p, r, f) in (("macro avg", report.macro_avg), ("weighted avg", report.weighted_avg)):
        lines.append(f"{label},{p:.6f},{r:.6f},{f:.6f},{report.total}")
    return "\n".join(lines) + "\n"


def render_report(report: ClassificationReport, format: str = "text") -> str:
    if format == "text":
        return _render_text(report)
    if format == "csv":
        return _render_csv(report)
    raise ConfigError(f"unknown report format {format!r}; choose one of {REPORT_FORMATS}")
