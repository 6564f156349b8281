"""Linear baselines: multinomial Naive Bayes and softmax logistic regression."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from urlsift.config import LogRegConfig
from urlsift.dataset import N_CLASSES
from urlsift.errors import ConfigError, DataError, NumericalError
from urlsift.features import SparseVector, as_csr, to_csr
from urlsift.numerics import check_labels, log_softmax, one_hot, predict_labels, softmax

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class NbModel:
    log_prior: np.ndarray
    log_likelihood: np.ndarray
    alpha: float

    def __post_init__(self):
        lp = np.asarray(self.log_prior, dtype=np.float64)
        ll = np.asarray(self.log_likelihood, dtype=np.float64)
        if lp.shape != (N_CLASSES,) or ll.ndim != 2 or ll.shape[0] != N_CLASSES:
            raise DataError(f"bad NB parameter shapes {lp.shape}, {ll.shape}")
        object.__setattr__(self, "log_prior", lp)
        object.__setattr__(self, "log_likelihood", ll)

    @property
    def dim(self) -> int:
        return self.log_likelihood.shape[1]

    def predict_log_proba(self, X) -> np.ndarray:
        X = as_csr(X, self.dim)
        scores = np.asarray(X @ self.log_likelihood.T) + self.log_prior
        return log_softmax(scores)

    def predict_proba(self, X) -> np.ndarray:
        return np.exp(self.predict_log_proba(X))

    def predict(self, X) -> np.ndarray:
        return predict_labels(self.predict_log_proba(X))


def train_multinomial_nb(X, y, alpha: float = 1.0) -> NbModel:
    if not alpha > 0:
        raise ConfigError(f"alpha must be > 0, got {alpha}")
    X = as_csr(X)
    y = check_labels(y, X.shape[0], require_all=True)
    if X.nnz and X.data.min() < 0:
        raise DataError("multinomial NB requires non-negative features")
    n_features = X.shape[1]
    class_count = np.bincount(y, minlength=N_CLASSES).astype(np.float64)
    feature_count = np.asarray((X.T @ one_hot(y)).T)
    smoothed = feature_count + alpha
    log_likelihood = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    log_prior = np.log(class_count) - np.log(class_count.sum())
    assert log_likelihood.shape == (N_CLASSES, n_features)
    return NbModel(log_prior, log_likelihood, float(alpha))


def nb_predict_log_proba(model: NbModel, x: SparseVector) -> np.ndarray:
    if x.dim != model.dim:
        raise DataError(f"dimension mismatch: vector dim {x.dim}, model dim {model.dim}")
    return model.predict_log_proba(to_csr([x]))[0]


@dataclass(frozen=True, eq=False)
class LogRegModel:
    weights: np.ndarray  # (4, V)
    bias: np.ndarray  # (4,)
    config: LogRegConfig = field(default_factory=LogRegConfig)
    loss_history: tuple[float, ...] = ()

    def __post_init__(self):
        W = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if W.ndim != 2 or W.shape[0] != N_CLASSES or b.shape != (N_CLASSES,):
            raise DataError(f"bad LogReg parameter shapes {W.shape}, {b.shape}")
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "bias", b)

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def decision_function(self, X) -> np.ndarray:
        X = as_csr(X, self.dim)
        return np.asarray(X @ self.weights.T) + self.bias

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return predict_labels(self.predict_proba(X))


def logreg_predict_proba(model: LogRegModel, x: SparseVector) -> np.ndarray:
    if x.dim != model.dim:
        raise DataError(f"dimension mismatch: vector dim {x.dim}, model dim {model.dim}")
    return model.predict_proba(to_csr([x]))[0]


def logreg_loss_and_grad(W, b, X: sp.csr_matrix, y, l2: float):
    """Mean cross-entropy of softmax(XW^T + b) plus (l2/2)||W||^2, with gradients."""
    n = X.shape[0]
    logits = np.asarray(X @ W.T) + b
    logp = log_softmax(logits)
    loss = -logp[np.arange(n), y].mean() + 0.5 * l2 * float(np.sum(W * W))
    delta = (np.exp(logp) - one_hot(y)) / n
    dW = np.asarray(X.T @ delta).T + l2 * W
    db = delta.sum(axis=0)
    return loss, dW, db


def train_logreg(X, y, config: LogRegConfig | None = None) -> LogRegModel:
    """Seeded mini-batch SGD from zero initialisation.

    Unlike NB, classes may be absent from ``y``; their logits just receive
    negative gradient.
    """
    config = config or LogRegConfig()
    X = as_csr(X)
    y = check_labels(y, X.shape[0], require_all=False)
    n, dim = X.shape
    W = np.zeros((N_CLASSES, dim))
    b = np.zeros(N_CLASSES)
    rng = np.random.default_rng(np.uint64(config.seed))
    lr, l2 = config.learning_rate, config.l2
    history = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for batch, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start:start + config.batch_size]
            Xb, yb = X[idx], y[idx]
            m = len(idx)
            logp = log_softmax(np.asarray(Xb @ W.T) + b)
            loss = -logp[np.arange(m), yb].mean()
            if not np.isfinite(loss):
                raise NumericalError(f"non-finite loss at epoch {epoch + 1}, batch {batch}", epoch + 1, batch)
            total += loss * m
            delta = (np.exp(logp) - one_hot(yb)) / m
            # only columns present in the batch carry data gradient
            cols, inv = np.unique(Xb.indices, return_inverse=True)
            Xc = sp.csr_matrix((Xb.data, inv.ravel(), Xb.indptr), shape=(m, cols.size))
            g = np.asarray(Xc.T @ delta).T
            if l2:
                W *= 1.0 - lr * l2
            W[:, cols] -= lr * g
            b -= lr * delta.sum(axis=0)
        history.append(float(total / n))
        log.debug("logreg epoch %d loss %.6f", epoch + 1, history[-1])
    if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
        raise NumericalError("non-finite parameters after training", config.epochs, None)
    return LogRegModel(W, b, config, tuple(history))
