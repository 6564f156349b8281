"""Corpus loading, stratified splitting and class-distribution reporting."""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from urlsift.errors import ConfigError, DataError


class ClassLabel(IntEnum):
    BENIGN = 0
    DEFACEMENT = 1
    MALWARE = 2
    PHISHING = 3

    @property
    def label_name(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value: str) -> "ClassLabel":
        try:
            return cls[value.strip().upper()]
        except KeyError:
            raise DataError(f"unknown label {value!r}") from None


CLASS_NAMES = tuple(c.label_name for c in ClassLabel)
N_CLASSES = len(CLASS_NAMES)


@dataclass(frozen=True)
class UrlRecord:
    url: str
    label: ClassLabel

    def __post_init__(self):
        url = self.url.strip()
        if not url:
            raise DataError("empty URL")
        object.__setattr__(self, "url", url)
        object.__setattr__(self, "label", ClassLabel(self.label))


class LabeledDataset:
    """Ordered (url, label) pairs plus the digest of the file they came from.

    Stored column-wise (a tuple of URLs and an int8 label array) because the
    full corpus has ~650k rows; ``records`` yields :class:`UrlRecord` views.
    """

    def __init__(self, urls: Sequence[str], labels, source_digest: str = ""):
        labels = np.asarray(labels, dtype=np.int8)
        if len(urls) != len(labels):
            raise DataError(f"{len(urls)} urls but {len(labels)} labels")
        if labels.size and (labels.min() < 0 or labels.max() >= N_CLASSES):
            raise DataError("label code outside [0, 3]")
        self.urls = tuple(urls)
        self.labels = labels
        self.labels.flags.writeable = False
        self.source_digest = source_digest

    @classmethod
    def from_records(cls, records, source_digest=""):
        records = list(records)
        return cls([r.url for r in records], [int(r.label) for r in records], source_digest)

    def __len__(self):
        return len(self.urls)

    def __getitem__(self, i) -> UrlRecord:
        return UrlRecord(self.urls[i], ClassLabel(int(self.labels[i])))

    @property
    def records(self) -> Iterator[UrlRecord]:
        for i in range(len(self)):
            yield self[i]

    def subset(self, indices) -> "LabeledDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset([self.urls[i] for i in indices], self.labels[indices], self.source_digest)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=N_CLASSES).astype(np.int64)

    def require_all_classes(self):
        """Raise unless every class occurs at least once (training precondition)."""
        missing = [CLASS_NAMES[c] for c, n in enumerate(self.class_counts()) if n == 0]
        if missing:
            raise DataError(f"training data has no examples of: {', '.join(missing)}")

    def __eq__(self, other):
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return self.urls == other.urls and np.array_equal(self.labels, other.labels)

    def __repr__(self):
        return f"LabeledDataset(n={len(self)}, digest={self.source_digest[:12]!r})"


def _has_surrogates(s: str) -> bool:
    # surrogateescape maps undecodable bytes to U+DC80..U+DCFF
    return any("\udc80" <= ch <= "\udcff" for ch in s)


def load_csv(path, url_column: str = "url", label_column: str = "type") -> LabeledDataset:
    """Read a ``url,type`` CSV (the Kaggle malicious-URL layout) in file order.

    Row numbers in error messages count data rows from 1 (the header is not a
    data row).
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read dataset {path}: {e.strerror}") from e
    text = raw.decode("utf-8", errors="surrogateescape")
    if text.startswith("\ufeff"):
        text = text[1:]
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise ConfigError(f"{path}: file is empty, expected a header row") from None
    header = [h.strip() for h in header]
    for col in (url_column, label_column):
        if col not in header:
            raise ConfigError(f"{path}: missing column {col!r} (header: {header})")
    ui, li = header.index(url_column), header.index(label_column)
    width = max(ui, li) + 1

    urls: list[str] = []
    labels: list[int] = []
    for row_no, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) < width:
            raise DataError(f"{path}: row {row_no}: expected at least {width} fields", row=row_no)
        url, label = row[ui], row[li]
        if _has_surrogates(url) or _has_surrogates(label):
            raise DataError(f"{path}: row {row_no}: invalid UTF-8", row=row_no)
        url = url.strip()
        if not url:
            raise DataError(f"{path}: row {row_no}: empty URL", row=row_no)
        try:
            code = ClassLabel.parse(label)
        except DataError:
            raise DataError(f"{path}: row {row_no}: unknown label {label!r}", row=row_no) from None
        urls.append(url)
        labels.append(int(code))
    return LabeledDataset(urls, labels, hashlib.sha256(raw).hexdigest())


def write_csv(dataset: LabeledDataset, path, url_column="url", label_column="type"):
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow([url_column, label_column])
        for url, code in zip(dataset.urls, dataset.labels):
            w.writerow([url, CLASS_NAMES[code]])


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_indices(labels, test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Index-level stratified split; both index arrays come back ascending."""
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError(f"test_fraction must be in (0, 1), got {test_fraction}")
    labels = np.asarray(labels)
    rng = np.random.default_rng(np.uint64(seed))
    test_parts = []
    for c in range(N_CLASSES):
        members = np.flatnonzero(labels == c)
        if members.size == 0:
            continue
        if members.size < 2:
            raise DataError(f"class {CLASS_NAMES[c]!r} has {members.size} record(s); need at least 2 to split")
        n_test = _round_half_up(test_fraction * members.size)
        test_parts.append(rng.permutation(members)[:n_test])
    test = np.sort(np.concatenate(test_parts)) if test_parts else np.empty(0, np.int64)
    mask = np.ones(labels.size, dtype=bool)
    mask[test] = False
    return np.flatnonzero(mask), test


def stratified_split(dataset: LabeledDataset, test_fraction: float = 0.2, seed: int = 42):
    train_idx, test_idx = stratified_indices(dataset.labels, test_fraction, seed)
    return dataset.subset(train_idx), dataset.subset(test_idx)


@dataclass(frozen=True)
class DistributionReport:
    counts: tuple[int, ...]
    fractions: tuple[float, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def as_dict(self) -> dict[str, int]:
        return dict(zip(CLASS_NAMES, self.counts))

    def render_text(self, title: str = "") -> str:
        lines = [title] if title else []
        width = max(len(n) for n in CLASS_NAMES)
        for name, n, f in zip(CLASS_NAMES, self.counts, self.fractions):
            lines.append(f"{name:>{width}}  {n:>9d}  {f:8.4f}")
        lines.append(f"{'total':>{width}}  {self.total:>9d}  {1.0:8.4f}")
        return "\n".join(lines) + "\n"

    def render_csv(self) -> str:
        lines = ["class,count,fraction"]
        lines += [f"{name},{n},{f:.6f}" for name, n, f in zip(CLASS_NAMES, self.counts, self.fractions)]
        return "\n".join(lines) + "\n"


def class_distribution(dataset: LabeledDataset) -> DistributionReport:
    if len(dataset) == 0:
        raise DataError("cannot compute the class distribution of an empty dataset")
    counts = dataset.class_counts()
    total = int(counts.sum())
    return DistributionReport(tuple(int(n) for n in counts), tuple(int(n) / total for n in counts))
