"""Fully connected ReLU network with softmax output, trained by backpropagation.

The first layer always consumes sparse input directly: a forward pass costs
O(nnz(x) * h1) rather than O(V * h1), and a training step only touches the
rows of the first weight matrix whose features occur in the batch.
"""

from __future__ import annotations

import copy
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from urlsift.config import TrainConfig
from urlsift.dataset import N_CLASSES, stratified_indices
from urlsift.errors import ConfigError, DataError, NumericalError
from urlsift.features import SparseVector, as_csr
from urlsift.numerics import (
    PROB_FLOOR,
    check_labels,
    log_softmax,
    mean_cross_entropy,
    one_hot,
    predict_labels,
    softmax,
)

log = logging.getLogger(__name__)


@dataclass(eq=False)
class MlpParameters:
    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]  # weights[k] has shape (layer_sizes[k], layer_sizes[k+1])
    biases: list[np.ndarray]
    seed: int = 0

    def __post_init__(self):
        self.layer_sizes = tuple(int(n) for n in self.layer_sizes)
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        sizes = self.layer_sizes
        if len(sizes) < 3 or sizes[-1] != N_CLASSES:
            raise DataError(f"layer sizes {sizes}: need >= 3 layers ending in {N_CLASSES}")
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise DataError("one weight matrix and bias vector per layer transition required")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[k], sizes[k + 1]) or b.shape != (sizes[k + 1],):
                raise DataError(f"layer {k}: weight {w.shape} / bias {b.shape} disagree with sizes {sizes}")

    @property
    def dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.weights + self.biases)

    def predict_proba(self, X) -> np.ndarray:
        X = as_csr(X, self.dim)
        a = np.asarray(X @ self.weights[0]) + self.biases[0]
        for w, b in zip(self.weights[1:], self.biases[1:]):
            a = np.maximum(a, 0.0) @ w + b
        return softmax(a)

    def predict(self, X) -> np.ndarray:
        return predict_labels(self.predict_proba(X))

    def copy(self) -> "MlpParameters":
        return copy.deepcopy(self)


def init_mlp(layer_sizes, seed: int = 0) -> MlpParameters:
    """Glorot-uniform weights from ``default_rng(seed)``, zero biases."""
    sizes = tuple(int(n) for n in layer_sizes)
    if len(sizes) < 3:
        raise ConfigError(f"an MLP needs at least 3 layers (input, hidden, output), got {sizes}")
    if sizes[-1] != N_CLASSES:
        raise ConfigError(f"output layer must have {N_CLASSES} units, got {sizes[-1]}")
    if min(sizes) < 1:
        raise ConfigError(f"layer sizes must be >= 1, got {sizes}")
    rng = np.random.default_rng(np.uint64(seed))
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParameters(sizes, weights, biases, seed)


@dataclass(frozen=True, eq=False)
class ForwardTrace:
    x: SparseVector
    pre_activations: list[np.ndarray]
    activations: list[np.ndarray]  # activations[-1] is the probability vector

    @property
    def probs(self) -> np.ndarray:
        return self.activations[-1]


def forward(params: MlpParameters, x: SparseVector) -> ForwardTrace:
    if x.dim != params.dim:
        raise DataError(f"dimension mismatch: input dim {x.dim}, network expects {params.dim}")
    n_layers = len(params.weights)
    z = x.values @ params.weights[0][x.indices] + params.biases[0]
    pre, acts = [z], []
    for k in range(1, n_layers):
        a = np.maximum(z, 0.0)
        acts.append(a)
        z = a @ params.weights[k] + params.biases[k]
        pre.append(z)
    acts.append(softmax(z))
    return ForwardTrace(x, pre, acts)


def cross_entropy_loss(probs, label: int) -> float:
    return -math.log(max(float(probs[int(label)]), PROB_FLOOR))


@dataclass(eq=False)
class MlpGradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for pair in zip(self.weights, self.biases) for a in pair])


def backward(params: MlpParameters, trace: ForwardTrace, label: int) -> MlpGradients:
    """Gradient of ``cross_entropy_loss(forward(params, x).probs, label)``.

    Uses ReLU'(0) = 0. The first-layer gradient is returned dense; it is
    non-zero only on the rows of the input's active features.
    """
    n_layers = len(params.weights)
    if len(trace.pre_activations) != n_layers or len(trace.activations) != n_layers:
        raise AssertionError("trace does not match the network depth")
    delta = trace.probs - one_hot(np.array([int(label)]))[0]
    grad_w: list[np.ndarray] = [None] * n_layers
    grad_b: list[np.ndarray] = [None] * n_layers
    for k in range(n_layers - 1, 0, -1):
        grad_w[k] = np.outer(trace.activations[k - 1], delta)
        grad_b[k] = delta
        delta = (params.weights[k] @ delta) * (trace.pre_activations[k - 1] > 0)
    g0 = np.zeros_like(params.weights[0])
    g0[trace.x.indices] = np.outer(trace.x.values, delta)
    grad_w[0], grad_b[0] = g0, delta
    for g, w in zip(grad_w, params.weights):
        if g.shape != w.shape:
            raise AssertionError("gradient shape does not match parameters")
    return MlpGradients(grad_w, grad_b)


def gradient_check(params: MlpParameters, x: SparseVector, label: int, epsilon: float = 1e-5,
                   atol: float = 1e-8) -> float:
    """Max relative error between backprop and central differences over every parameter.

    Entries where both gradients are within ``atol`` of zero compare absolutely
    and count as error 0 when they agree to ``atol``.
    """
    if not epsilon > 0:
        raise ConfigError(f"epsilon must be > 0, got {epsilon}")
    analytic = backward(params, forward(params, x), label)
    probe = params.copy()

    def loss():
        return cross_entropy_loss(forward(probe, x).probs, label)

    worst = 0.0
    for arrays, grads in ((probe.weights, analytic.weights), (probe.biases, analytic.biases)):
        for arr, grad in zip(arrays, grads):
            flat, gflat = arr.reshape(-1), grad.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + epsilon
                up = loss()
                flat[i] = orig - epsilon
                down = loss()
                flat[i] = orig
                numeric = (up - down) / (2 * epsilon)
                a = gflat[i]
                diff = abs(a - numeric)
                scale = max(abs(a), abs(numeric))
                if scale <= atol:
                    err = 0.0 if diff <= atol else diff / atol
                else:
                    err = diff / scale
                worst = max(worst, err)
    return worst


@dataclass(frozen=True)
class EpochLoss:
    epoch: int
    train_loss: float
    val_loss: float | None = None


@dataclass(eq=False)
class TrainResult:
    params: MlpParameters
    history: list[EpochLoss] = field(default_factory=list)
    best_epoch: int | None = None

    def history_csv(self) -> str:
        lines = ["epoch,train_loss,val_loss"]
        for h in self.history:
            val = "" if h.val_loss is None else f"{h.val_loss:.6f}"
            lines.append(f"{h.epoch},{h.train_loss:.6f},{val}")
        return "\n".join(lines) + "\n"


def mean_loss(params: MlpParameters, X, y) -> float:
    return mean_cross_entropy(params.predict_proba(X), np.asarray(y, dtype=np.int64))


def train_mlp(X, y, config: TrainConfig | None = None, on_epoch=None) -> TrainResult:
    """Seeded, shuffled mini-batch SGD with L2 weight decay on the weight matrices.

    With ``config.patience > 0`` a stratified ``val_fraction`` of the data is
    held out and the parameters from the epoch with the lowest held-out loss
    are returned. ``on_epoch`` is called with each :class:`EpochLoss`.
    """
    config = config or TrainConfig()
    X = as_csr(X)
    y = check_labels(y, X.shape[0], require_all=True)

    X_val = y_val = None
    if config.patience:
        fit_idx, val_idx = stratified_indices(y, config.val_fraction, config.seed)
        X_val, y_val = X[val_idx], y[val_idx]
        X, y = X[fit_idx], y[fit_idx]

    n, dim = X.shape
    params = init_mlp((dim, *config.hidden, N_CLASSES), config.seed)
    shuffle_rng = np.random.default_rng([config.seed, 1])
    lr, l2 = config.learning_rate, config.l2
    n_layers = len(params.weights)

    # first-layer weights are held as scale * raw so weight decay is O(1) per step
    raw0 = params.weights[0]
    scale = 1.0

    best_val, best_params, best_epoch, stale = math.inf, None, None, 0
    history: list[EpochLoss] = []
    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for batch, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start:start + config.batch_size]
            Xb, yb = X[idx], y[idx]
            m = len(idx)
            cols, inv = np.unique(Xb.indices, return_inverse=True)
            Xc = sp.csr_matrix((Xb.data, inv.ravel(), Xb.indptr), shape=(m, cols.size))

            zs = [np.asarray(Xc @ (raw0[cols] * scale)) + params.biases[0]]
            acts = []
            for k in range(1, n_layers):
                acts.append(np.maximum(zs[-1], 0.0))
                zs.append(acts[-1] @ params.weights[k] + params.biases[k])
            logp = log_softmax(zs[-1])
            loss = -logp[np.arange(m), yb].mean()
            if not np.isfinite(loss):
                raise NumericalError(f"non-finite loss at epoch {epoch}, batch {batch}", epoch, batch)
            total += loss * m

            delta = (np.exp(logp) - one_hot(yb)) / m
            for k in range(n_layers - 1, 0, -1):
                gw = acts[k - 1].T @ delta + l2 * params.weights[k]
                gb = delta.sum(axis=0)
                delta = (delta @ params.weights[k].T) * (zs[k - 1] > 0)
                params.weights[k] -= lr * gw
                params.biases[k] -= lr * gb
            g0 = np.asarray(Xc.T @ delta)
            scale *= 1.0 - lr * l2
            raw0[cols] -= (lr / scale) * g0
            params.biases[0] -= lr * delta.sum(axis=0)

        if scale != 1.0:
            raw0 *= scale
            scale = 1.0
        val_loss = mean_loss(params, X_val, y_val) if X_val is not None else None
        record = EpochLoss(epoch, float(total / n), val_loss)
        history.append(record)
        log.info("mlp epoch %d train_loss %.6f val_loss %s", epoch, record.train_loss, val_loss)
        if on_epoch is not None:
            on_epoch(record)
        if not params.is_finite():
            raise NumericalError(f"non-finite parameters after epoch {epoch}", epoch, None)
        if X_val is not None:
            if val_loss < best_val:
                best_val, best_params, best_epoch, stale = val_loss, params.copy(), epoch, 0
            else:
                stale += 1
                if stale >= config.patience:
                    log.info("early stop after epoch %d (best %d)", epoch, best_epoch)
                    break

    if best_params is not None:
        return TrainResult(best_params, history, best_epoch)
    return TrainResult(params, history, history[-1].epoch)
