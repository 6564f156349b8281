"""Small numeric helpers shared by all classifiers."""

import numpy as np

from urlsift.dataset import N_CLASSES
from urlsift.errors import DataError

PROB_FLOOR = 1e-12


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(scores: np.ndarray) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    m = s.max(axis=-1, keepdims=True)
    return s - (m + np.log(np.exp(s - m).sum(axis=-1, keepdims=True)))


def predict_labels(probs: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximum: ties go to the lowest class code
    return np.argmax(probs, axis=-1)


def mean_cross_entropy(probs: np.ndarray, y: np.ndarray) -> float:
    p = probs[np.arange(len(y)), y]
    return float(np.mean(-np.log(np.maximum(p, PROB_FLOOR))))


def one_hot(y: np.ndarray, n_classes: int = N_CLASSES) -> np.ndarray:
    out = np.zeros((len(y), n_classes))
    out[np.arange(len(y)), y] = 1.0
    return out


def check_labels(y, n_rows: int, require_all: bool) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    if y.ndim != 1 or y.size != n_rows:
        raise DataError(f"got {y.size} labels for {n_rows} samples")
    if n_rows == 0:
        raise DataError("no training samples")
    if y.min() < 0 or y.max() >= N_CLASSES:
        raise DataError("label code outside [0, 3]")
    if require_all:
        missing = sorted(set(range(N_CLASSES)) - set(np.unique(y).tolist()))
        if missing:
            raise DataError(f"training labels miss class code(s) {missing}")
    return y
