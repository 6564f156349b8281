"""Delimiter-split URL lexer."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from urlsift.errors import DataError

DEFAULT_DELIMITERS = "/.-?=&_:@~%+#,;()[]'\" "
MAX_TOKEN_LEN = 64


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    source_len: int

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


@dataclass(frozen=True)
class Tokenizer:
    """Lowercases a URL, splits it on a delimiter set and truncates long tokens.

    Percent escapes are not decoded: ``%`` is itself a delimiter, so ``%20``
    yields the token ``20``.
    """

    delimiters: str = DEFAULT_DELIMITERS
    max_token_len: int = MAX_TOKEN_LEN
    _pattern: re.Pattern = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.delimiters:
            raise ValueError("delimiter set must not be empty")
        if self.max_token_len < 1:
            raise ValueError("max_token_len must be >= 1")
        charset = "".join(sorted(set(self.delimiters)))
        object.__setattr__(self, "delimiters", charset)
        object.__setattr__(self, "_pattern", re.compile("[" + re.escape(charset) + "]+"))

    def tokenize(self, url: str) -> TokenSequence:
        stripped = url.strip()
        if not stripped:
            raise DataError("empty URL")
        n = self.max_token_len
        tokens = tuple(t[:n] for t in self._pattern.split(stripped.lower()) if t)
        return TokenSequence(tokens, len(url))

    def tokenize_batch(self, urls: Sequence[str]) -> list[TokenSequence]:
        out = []
        for i, url in enumerate(urls):
            try:
                out.append(self.tokenize(url))
            except DataError as e:
                raise DataError(f"url #{i}: {e}", index=i) from None
        return out


DEFAULT_TOKENIZER = Tokenizer()


def tokenize(url: str) -> TokenSequence:
    return DEFAULT_TOKENIZER.tokenize(url)


def tokenize_batch(urls: Sequence[str]) -> list[TokenSequence]:
    return DEFAULT_TOKENIZER.tokenize_batch(urls)
