"""Lexical URL threat classification: tokenizer, TF-IDF features, NB / LogReg / MLP."""

from urlsift.errors import (
    ConfigError,
    DataError,
    FormatError,
    NumericalError,
    StoreError,
    UrlsiftError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "FormatError",
    "NumericalError",
    "StoreError",
    "UrlsiftError",
]
