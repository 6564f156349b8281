"""Vocabulary, count vectors and smoothed TF-IDF weighting.

Single-vector operations take/return :class:`SparseVector`; the batch paths
work on ``scipy.sparse.csr_matrix`` rows and are what training and serving
use. The single-vector functions delegate to the batch code so both agree
bit-for-bit.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from urlsift.errors import ConfigError, DataError
from urlsift.tokenizer import DEFAULT_TOKENIZER, TokenSequence, Tokenizer

IDF_FORMULA = "ln((1+N)/(1+df))+1"
INPUT_MODES = ("tfidf", "counts")


@dataclass(frozen=True, eq=False)
class SparseVector:
    dim: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise DataError("indices and values must be 1-d arrays of equal length")
        if idx.size:
            if idx[0] < 0 or idx[-1] >= self.dim or np.any(np.diff(idx) <= 0):
                raise DataError(f"indices must be unique, ascending and < {self.dim}")
            if np.any(val == 0):
                raise DataError("sparse vector stores an explicit zero")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def from_pairs(cls, dim: int, pairs: Iterable[tuple[int, float]]):
        pairs = sorted(pairs)
        return cls(dim, [p[0] for p in pairs], [p[1] for p in pairs])

    @classmethod
    def zeros(cls, dim: int):
        return cls(dim, np.empty(0, np.int64), np.empty(0, np.float64))

    @property
    def nnz(self) -> int:
        return self.indices.size

    def pairs(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )


def to_csr(vectors: Sequence[SparseVector], dim: int | None = None) -> sp.csr_matrix:
    if dim is None:
        if not vectors:
            raise DataError("cannot infer dimension of an empty vector list")
        dim = vectors[0].dim
    for v in vectors:
        if v.dim != dim:
            raise DataError(f"dimension mismatch: {v.dim} != {dim}")
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([v.nnz for v in vectors])
    if vectors:
        indices = np.concatenate([v.indices for v in vectors])
        data = np.concatenate([v.values for v in vectors])
    else:
        indices, data = np.empty(0, np.int64), np.empty(0)
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), dim))


def as_csr(X, dim: int | None = None) -> sp.csr_matrix:
    """Accept a CSR matrix, any scipy sparse matrix or a list of SparseVector."""
    if sp.issparse(X):
        X = sp.csr_matrix(X, dtype=np.float64)
    else:
        X = to_csr(list(X), dim)
    if dim is not None and X.shape[1] != dim:
        raise DataError(f"dimension mismatch: got {X.shape[1]} features, expected {dim}")
    if not X.has_canonical_format:
        X.sum_duplicates()
    return X


def row_vector(X: sp.csr_matrix, i: int) -> SparseVector:
    lo, hi = X.indptr[i], X.indptr[i + 1]
    data = X.data[lo:hi]
    keep = data != 0
    return SparseVector(X.shape[1], X.indices[lo:hi][keep], data[keep])


@dataclass(frozen=True, eq=False)
class Vocabulary:
    """Token -> column map, column order = (df desc, token asc) rank."""

    tokens: tuple[str, ...]
    df: np.ndarray
    min_df: int
    max_features: int
    fitted_on: int
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        df = np.asarray(self.df, dtype=np.int64)
        if df.shape != (len(self.tokens),):
            raise DataError("df length does not match token count")
        index = {t: i for i, t in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise DataError("duplicate token in vocabulary")
        object.__setattr__(self, "df", df)
        object.__setattr__(self, "index", index)

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __len__(self):
        return len(self.tokens)

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return (
            self.tokens == other.tokens
            and np.array_equal(self.df, other.df)
            and (self.min_df, self.max_features, self.fitted_on)
            == (other.min_df, other.max_features, other.fitted_on)
        )

    def dump_csv(self) -> str:
        lines = ["token,index,df"]
        for i, (tok, df) in enumerate(zip(self.tokens, self.df.tolist())):
            # tokens never contain ',' (a delimiter) but may contain '"'
            # under a custom delimiter set
            if any(ch in tok for ch in ',"\n\r'):
                tok = '"' + tok.replace('"', '""') + '"'
            lines.append(f"{tok},{i},{df}")
        return "\n".join(lines) + "\n"


def build_vocabulary(token_sequences: Sequence[TokenSequence], min_df: int = 2, max_features: int = 100_000) -> Vocabulary:
    if not token_sequences:
        raise DataError("cannot build a vocabulary from zero documents")
    if min_df < 1 or max_features < 1:
        raise ConfigError(f"min_df and max_features must be >= 1 (got {min_df}, {max_features})")
    df = Counter()
    for seq in token_sequences:
        df.update(set(seq.tokens))
    kept = [(-n, tok) for tok, n in df.items() if n >= min_df]
    if not kept:
        raise ConfigError(f"no token reaches min_df={min_df}")
    kept.sort()
    kept = kept[:max_features]
    return Vocabulary(
        tokens=tuple(tok for _, tok in kept),
        df=np.array([-n for n, _ in kept], dtype=np.int64),
        min_df=min_df,
        max_features=max_features,
        fitted_on=len(token_sequences),
    )


def count_matrix(token_sequences: Sequence[TokenSequence], vocab: Vocabulary) -> sp.csr_matrix:
    index = vocab.index
    indptr = [0]
    cols: list[int] = []
    for seq in token_sequences:
        cols.extend(sorted(j for j in (index.get(t) for t in seq.tokens) if j is not None))
        indptr.append(len(cols))
    X = sp.csr_matrix(
        (np.ones(len(cols)), np.asarray(cols, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(token_sequences), vocab.size),
    )
    X.sum_duplicates()
    return X


def count_vectorize(tokens: TokenSequence, vocab: Vocabulary) -> SparseVector:
    return row_vector(count_matrix([tokens], vocab), 0)


@dataclass(frozen=True, eq=False)
class IdfWeights:
    weights: np.ndarray
    formula: str = IDF_FORMULA

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))

    @property
    def dim(self) -> int:
        return self.weights.size

    def __eq__(self, other):
        if not isinstance(other, IdfWeights):
            return NotImplemented
        return self.formula == other.formula and np.array_equal(self.weights, other.weights)


def fit_idf(count_vectors) -> IdfWeights:
    """Smoothed IDF: ``ln((1 + N) / (1 + df)) + 1`` per column."""
    if not sp.issparse(count_vectors):
        count_vectors = list(count_vectors)
        if not count_vectors:
            raise DataError("fit_idf needs at least one vector")
    X = as_csr(count_vectors)
    n = X.shape[0]
    if n == 0:
        raise DataError("fit_idf needs at least one vector")
    present = X.copy()
    present.eliminate_zeros()
    df = np.bincount(present.indices, minlength=X.shape[1])
    return IdfWeights(np.log((1.0 + n) / (1.0 + df)) + 1.0)


def l2_normalize_rows(X: sp.csr_matrix) -> sp.csr_matrix:
    X = X.copy()
    sq = X.data * X.data
    norms = np.zeros(X.shape[0])
    nonempty = np.diff(X.indptr) > 0
    norms[nonempty] = np.sqrt(np.add.reduceat(sq, X.indptr[:-1][nonempty]))
    scale = np.repeat(norms, np.diff(X.indptr))
    ok = scale > 0
    X.data[ok] = X.data[ok] / scale[ok]
    return X


def tfidf_matrix(counts: sp.csr_matrix, idf: IdfWeights) -> sp.csr_matrix:
    if counts.shape[1] != idf.dim:
        raise DataError(f"dimension mismatch: counts have {counts.shape[1]} columns, idf has {idf.dim}")
    X = counts.copy()
    X.data = X.data * idf.weights[X.indices]
    return l2_normalize_rows(X)


def tfidf_transform(counts: SparseVector, idf: IdfWeights) -> SparseVector:
    if counts.dim != idf.dim:
        raise DataError(f"dimension mismatch: vector dim {counts.dim}, idf dim {idf.dim}")
    return row_vector(tfidf_matrix(to_csr([counts]), idf), 0)


@dataclass(frozen=True, eq=False)
class Featurizer:
    """Fitted URL -> feature-matrix transform (tokenizer + vocabulary + optional IDF).

    ``input_mode="counts"`` skips IDF weighting and normalization; it exists
    for the raw-count ablation of the MLP.
    """

    tokenizer: Tokenizer
    vocab: Vocabulary
    idf: IdfWeights | None
    input_mode: str = "tfidf"

    def __post_init__(self):
        if self.input_mode not in INPUT_MODES:
            raise ConfigError(f"input_mode must be one of {INPUT_MODES}, got {self.input_mode!r}")
        if self.input_mode == "tfidf":
            if self.idf is None:
                raise ConfigError("tfidf input mode requires fitted IDF weights")
            if self.idf.dim != self.vocab.size:
                raise DataError(f"idf dim {self.idf.dim} != vocabulary size {self.vocab.size}")

    @property
    def dim(self) -> int:
        return self.vocab.size

    @classmethod
    def fit(cls, urls: Sequence[str], tokenizer: Tokenizer = DEFAULT_TOKENIZER, min_df: int = 2,
            max_features: int = 100_000, input_mode: str = "tfidf"):
        seqs = tokenizer.tokenize_batch(urls)
        vocab = build_vocabulary(seqs, min_df, max_features)
        idf = fit_idf(count_matrix(seqs, vocab)) if input_mode == "tfidf" else None
        return cls(tokenizer, vocab, idf, input_mode)

    def transform_tokens(self, seqs: Sequence[TokenSequence]) -> sp.csr_matrix:
        counts = count_matrix(seqs, self.vocab)
        if self.input_mode == "counts":
            return counts
        return tfidf_matrix(counts, self.idf)

    def transform(self, urls: Sequence[str]) -> sp.csr_matrix:
        return self.transform_tokens(self.tokenizer.tokenize_batch(urls))

    def __eq__(self, other):
        if not isinstance(other, Featurizer):
            return NotImplemented
        return (
            self.tokenizer == other.tokenizer
            and self.vocab == other.vocab
            and self.idf == other.idf
            and self.input_mode == other.input_mode
        )
