"""USFT model bundles: tokenizer + vocabulary + IDF + one trained model.

Layout (every integer and float little-endian)::

    b"USFT"  u8 version  u8 kind
    str metadata_json
    str delimiters  u32 max_token_len  str input_mode
    u64 min_df  u64 max_features  u64 fitted_on  u32 V  V x str token  V x i64 df
    u8 has_idf  [str formula  array idf]
    model section (kind specific, see _write_model)

``str`` is a u32 byte length followed by UTF-8; ``array`` is u8 ndim, ndim x u64
dims, then float64 data in C order.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from urlsift.config import LogRegConfig
from urlsift.dataset import CLASS_NAMES
from urlsift.errors import CorruptionError, DataError, FormatError, StoreError
from urlsift.features import Featurizer, IdfWeights, Vocabulary
from urlsift.linear import LogRegModel, NbModel
from urlsift.mlp import MlpParameters
from urlsift.tokenizer import Tokenizer

MAGIC = b"USFT"
FORMAT_VERSION = 1
SUPPORTED_VERSIONS = (1,)
KINDS = ("nb", "logreg", "mlp")
_MODEL_TYPES = {"nb": NbModel, "logreg": LogRegModel, "mlp": MlpParameters}


def model_arrays(model) -> list[np.ndarray]:
    if isinstance(model, NbModel):
        return [model.log_prior, model.log_likelihood]
    if isinstance(model, LogRegModel):
        return [model.weights, model.bias]
    if isinstance(model, MlpParameters):
        return [a for pair in zip(model.weights, model.biases) for a in pair]
    raise TypeError(f"not a model: {type(model).__name__}")


@dataclass(eq=False)
class ModelBundle:
    kind: str
    featurizer: Featurizer
    model: NbModel | LogRegModel | MlpParameters
    metadata: dict = field(default_factory=dict)
    version: int = FORMAT_VERSION

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown model kind {self.kind!r}")
        if not isinstance(self.model, _MODEL_TYPES[self.kind]):
            raise DataError(f"kind {self.kind!r} does not match model type {type(self.model).__name__}")
        if self.model.dim != self.featurizer.dim:
            raise DataError(f"model expects {self.model.dim} features, vocabulary has {self.featurizer.dim}")

    def predict_proba(self, urls) -> np.ndarray:
        return self.model.predict_proba(self.featurizer.transform(urls))

    def classify(self, urls) -> list[tuple[str, float]]:
        """(label name, probability of that label) per URL; ties go to the lowest class code."""
        if not urls:
            return []
        probs = self.predict_proba(urls)
        best = np.argmax(probs, axis=1)
        return [(CLASS_NAMES[c], float(probs[i, c])) for i, c in enumerate(best)]

    def __eq__(self, other):
        if not isinstance(other, ModelBundle):
            return NotImplemented
        if (self.kind, self.version, self.metadata) != (other.kind, other.version, other.metadata):
            return False
        if self.featurizer != other.featurizer:
            return False
        mine, theirs = model_arrays(self.model), model_arrays(other.model)
        return len(mine) == len(theirs) and all(np.array_equal(a, b) for a, b in zip(mine, theirs))


# -- writing ---------------------------------------------------------------


class _Writer:
    def __init__(self):
        self.parts: list[bytes] = []

    def u8(self, v):
        self.parts.append(struct.pack("<B", v))

    def u32(self, v):
        self.parts.append(struct.pack("<I", v))

    def u64(self, v):
        self.parts.append(struct.pack("<Q", v))

    def f64(self, v):
        self.parts.append(struct.pack("<d", v))

    def str(self, s: str):
        b = s.encode("utf-8")
        self.u32(len(b))
        self.parts.append(b)

    def array(self, a):
        a = np.ascontiguousarray(a, dtype="<f8")
        self.u8(a.ndim)
        for d in a.shape:
            self.u64(d)
        self.parts.append(a.tobytes())

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


def _write_model(w: _Writer, kind: str, model):
    if kind == "nb":
        w.f64(model.alpha)
        w.array(model.log_prior)
        w.array(model.log_likelihood)
    elif kind == "logreg":
        w.array(model.weights)
        w.array(model.bias)
        w.array(np.asarray(model.loss_history, dtype=np.float64))
    else:
        w.u64(model.seed)
        w.u32(len(model.layer_sizes))
        for n in model.layer_sizes:
            w.u64(n)
        for wt, b in zip(model.weights, model.biases):
            w.array(wt)
            w.array(b)


def encode_bundle(bundle: ModelBundle) -> bytes:
    fz = bundle.featurizer
    vocab = fz.vocab
    w = _Writer()
    w.parts.append(MAGIC)
    w.u8(bundle.version)
    w.u8(KINDS.index(bundle.kind))
    w.str(json.dumps(bundle.metadata, sort_keys=True))
    w.str(fz.tokenizer.delimiters)
    w.u32(fz.tokenizer.max_token_len)
    w.str(fz.input_mode)
    w.u64(vocab.min_df)
    w.u64(vocab.max_features)
    w.u64(vocab.fitted_on)
    w.u32(vocab.size)
    for tok in vocab.tokens:
        w.str(tok)
    w.parts.append(np.ascontiguousarray(vocab.df, dtype="<i8").tobytes())
    w.u8(fz.idf is not None)
    if fz.idf is not None:
        w.str(fz.idf.formula)
        w.array(fz.idf.weights)
    _write_model(w, bundle.kind, bundle.model)
    return w.getvalue()


def save_bundle(bundle: ModelBundle, path) -> None:
    """Write atomically: a temp file in the target directory, then rename."""
    path = Path(path)
    try:
        bundle.__post_init__()
    except DataError as e:
        raise AssertionError(f"inconsistent bundle: {e}") from e
    data = encode_bundle(bundle)
    directory = path.parent if str(path.parent) else Path(".")
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
        with os.fdopen(fd, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except OSError as e:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise StoreError(f"cannot write bundle {path}: {e.strerror}") from e


# -- reading ---------------------------------------------------------------


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = memoryview(buf)
        self.pos = 0

    def take(self, n: int, what: str) -> memoryview:
        if self.pos + n > len(self.buf):
            raise FormatError(f"truncated bundle: need {n} bytes for {what} at byte offset {self.pos}, "
                              f"file has {len(self.buf)}", self.pos)
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def _unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))[0]

    def u8(self, what):
        return self._unpack("<B", what)

    def u32(self, what):
        return self._unpack("<I", what)

    def u64(self, what):
        return self._unpack("<Q", what)

    def f64(self, what):
        return self._unpack("<d", what)

    def str(self, what) -> str:
        n = self.u32(what + " length")
        start = self.pos
        raw = self.take(n, what)
        try:
            return bytes(raw).decode("utf-8")
        except UnicodeDecodeError:
            raise FormatError(f"invalid UTF-8 in {what} at byte offset {start}", start) from None

    def array(self, what) -> np.ndarray:
        ndim = self.u8(what + " ndim")
        if ndim > 2:
            raise FormatError(f"{what}: unsupported ndim {ndim} at byte offset {self.pos - 1}", self.pos - 1)
        shape = tuple(self.u64(what + " shape") for _ in range(ndim))
        if any(d > len(self.buf) for d in shape):
            raise FormatError(f"{what}: shape {shape} exceeds file size (offset {self.pos})", self.pos)
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        raw = self.take(8 * count, what)
        return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)


def _read_model(r: _Reader, kind: str, metadata: dict):
    if kind == "nb":
        alpha = r.f64("nb alpha")
        return NbModel(r.array("nb log_prior"), r.array("nb log_likelihood"), alpha)
    if kind == "logreg":
        W, b = r.array("logreg weights"), r.array("logreg bias")
        history = tuple(r.array("logreg loss history").tolist())
        hp = metadata.get("hyperparameters") or {}
        try:
            config = LogRegConfig(**hp)
        except Exception:  # metadata is informational; fall back to defaults
            config = LogRegConfig()
        return LogRegModel(W, b, config, history)
    seed = r.u64("mlp seed")
    n_sizes = r.u32("mlp layer count")
    if n_sizes > 64:
        raise CorruptionError(f"implausible layer count {n_sizes}", r.pos - 4)
    sizes = tuple(r.u64("mlp layer size") for _ in range(n_sizes))
    weights, biases = [], []
    for k in range(max(n_sizes - 1, 0)):
        weights.append(r.array(f"mlp weight {k}"))
        biases.append(r.array(f"mlp bias {k}"))
    return MlpParameters(sizes, weights, biases, seed)


def decode_bundle(data: bytes) -> ModelBundle:
    if bytes(data[:4]) != MAGIC:
        raise FormatError("not a USFT bundle (bad magic bytes)", 0)
    r = _Reader(data)
    r.pos = 4
    version = r.u8("version")
    if version not in SUPPORTED_VERSIONS:
        raise FormatError(f"unsupported bundle version {version}; supported versions: "
                          f"{', '.join(map(str, SUPPORTED_VERSIONS))}", 4)
    kind_code = r.u8("kind")
    if kind_code >= len(KINDS):
        raise FormatError(f"unknown model kind code {kind_code}", 5)
    kind = KINDS[kind_code]
    try:
        metadata = json.loads(r.str("metadata"))
    except json.JSONDecodeError as e:
        raise FormatError(f"metadata is not valid JSON: {e}", 6) from None
    delimiters = r.str("delimiters")
    max_token_len = r.u32("max_token_len")
    input_mode = r.str("input_mode")
    min_df, max_features, fitted_on = r.u64("min_df"), r.u64("max_features"), r.u64("fitted_on")
    size = r.u32("vocabulary size")
    tokens = tuple(r.str("token") for _ in range(size))
    df = np.frombuffer(r.take(8 * size, "document frequencies"), dtype="<i8").astype(np.int64)
    idf = None
    if r.u8("idf flag"):
        formula = r.str("idf formula")
        idf = IdfWeights(r.array("idf weights"), formula)
    try:
        tokenizer = Tokenizer(delimiters, max_token_len)
        vocab = Vocabulary(tokens, df, min_df, max_features, fitted_on)
        featurizer = Featurizer(tokenizer, vocab, idf, input_mode)
        model = _read_model(r, kind, metadata)
        if r.pos != len(r.buf):
            raise FormatError(f"{len(r.buf) - r.pos} trailing bytes after model section", r.pos)
        return ModelBundle(kind, featurizer, model, metadata, version)
    except (DataError, ValueError) as e:
        raise CorruptionError(f"bundle is internally inconsistent: {e}", r.pos) from None
    except FormatError:
        raise
    except Exception as e:  # anything else from a damaged file is corruption, not a crash
        raise CorruptionError(f"bundle is corrupt: {e}", r.pos) from None


def load_bundle(path) -> ModelBundle:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise StoreError(f"cannot read bundle {path}: {e.strerror}") from e
    try:
        return decode_bundle(data)
    except FormatError as e:
        raise type(e)(f"{path}: {e}", e.offset) from None
