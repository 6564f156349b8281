"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class UrlsiftError(Exception):
    exit_code = 1


class ConfigError(UrlsiftError):
    """Invalid flag, hyperparameter or missing configuration item."""

    exit_code = 1


class DataError(UrlsiftError):
    """Bad input data: unknown label, empty URL, dimension mismatch, ..."""

    exit_code = 2

    def __init__(self, message, row=None, index=None):
        super().__init__(message)
        self.row = row
        self.index = index


class NumericalError(UrlsiftError):
    """Training produced a non-finite loss."""

    exit_code = 3

    def __init__(self, message, epoch=None, batch=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class StoreError(UrlsiftError):
    """I/O failure reading or writing a model bundle."""

    exit_code = 4


class FormatError(StoreError):
    """Bundle bytes do not follow the USFT layout (bad magic, truncation, version)."""

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class CorruptionError(FormatError):
    """Bundle parsed but its dimensions are inconsistent."""
