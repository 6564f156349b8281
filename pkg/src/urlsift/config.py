"""Hyperparameter dataclasses and the flags > config file > defaults merge."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from urlsift.errors import ConfigError
from urlsift.tokenizer import DEFAULT_DELIMITERS, MAX_TOKEN_LEN

CONFIG_ENV_VAR = "URLSIFT_CONFIG"
MODEL_KINDS = ("nb", "logreg", "mlp")


@dataclass(frozen=True)
class SplitConfig:
    test_fraction: float = 0.2
    seed: int = 42

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class FeatureConfig:
    min_df: int = 2
    max_features: int = 100_000
    input_mode: str = "tfidf"
    delimiters: str = DEFAULT_DELIMITERS
    max_token_len: int = MAX_TOKEN_LEN

    def __post_init__(self):
        if self.min_df < 1 or self.max_features < 1:
            raise ConfigError("min_df and max_features must be >= 1")
        if self.input_mode not in ("tfidf", "counts"):
            raise ConfigError(f"input_mode must be 'tfidf' or 'counts', got {self.input_mode!r}")


@dataclass(frozen=True)
class NbConfig:
    alpha: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")


@dataclass(frozen=True)
class LogRegConfig:
    learning_rate: float = 0.1
    epochs: int = 10
    batch_size: int = 256
    l2: float = 1e-6
    seed: int = 42

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.l2 < 0:
            raise ConfigError("l2 must be >= 0")


@dataclass(frozen=True)
class TrainConfig:
    """MLP architecture and SGD settings.

    ``patience=0`` disables early stopping; otherwise ``val_fraction`` of the
    training data is carved out (stratified, same seed) to monitor held-out loss.
    """

    hidden: tuple[int, ...] = (128,)
    learning_rate: float = 0.05
    epochs: int = 15
    batch_size: int = 256
    l2: float = 1e-6
    seed: int = 42
    patience: int = 3
    val_fraction: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not self.hidden or min(self.hidden) < 1:
            raise ConfigError("hidden layer sizes must be >= 1 and at least one hidden layer is required")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.l2 < 0:
            raise ConfigError("l2 must be >= 0")
        if self.patience < 0:
            raise ConfigError("patience must be >= 0")
        if self.patience and not 0.0 < self.val_fraction < 1.0:
            raise ConfigError("val_fraction must be in (0, 1) when early stopping is enabled")


@dataclass(frozen=True)
class RunConfig:
    model: str = "mlp"
    split: SplitConfig = field(default_factory=SplitConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    nb: NbConfig = field(default_factory=NbConfig)
    logreg: LogRegConfig = field(default_factory=LogRegConfig)
    mlp: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.model!r}; choose one of {{{', '.join(MODEL_KINDS)}}}")

    @property
    def model_config(self):
        return getattr(self, self.model)

    def to_dict(self) -> dict:
        return asdict(self)

    def effective(self) -> dict:
        """The part of the config that affects the chosen model's run."""
        return {
            "model": self.model,
            "split": asdict(self.split),
            "features": asdict(self.features),
            self.model: asdict(self.model_config),
        }


_SECTIONS = {"split": SplitConfig, "features": FeatureConfig, "nb": NbConfig, "logreg": LogRegConfig, "mlp": TrainConfig}


def _build_section(cls, values: dict, where: str):
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    try:
        return cls(**values)
    except TypeError as e:
        raise ConfigError(f"{where}: {e}") from None


def from_dict(data: dict, base: RunConfig | None = None, where: str = "config") -> RunConfig:
    """Overlay ``data`` (nested dict as in :meth:`RunConfig.to_dict`) onto ``base``."""
    base = base or RunConfig()
    unknown = set(data) - set(_SECTIONS) - {"model"}
    if unknown:
        raise ConfigError(f"{where}: unknown section(s) {sorted(unknown)}")
    updates = {}
    for name, cls in _SECTIONS.items():
        if name in data:
            if not isinstance(data[name], dict):
                raise ConfigError(f"{where}: section {name!r} must be a mapping")
            merged = {**asdict(getattr(base, name)), **data[name]}
            updates[name] = _build_section(cls, merged, f"{where}[{name}]")
    if "model" in data:
        updates["model"] = data["model"]
    return replace(base, **updates)


def load_config_file(path=None) -> RunConfig:
    """Defaults overlaid with the JSON config at ``path`` or ``$URLSIFT_CONFIG``."""
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return RunConfig()
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return from_dict(data, where=str(path))
