"""End-to-end train / evaluate pipeline shared by the CLI and the experiment scripts."""

from __future__ import annotations

import datetime as _dt
import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from urlsift.config import FeatureConfig, RunConfig, SplitConfig
from urlsift.dataset import DistributionReport, LabeledDataset, class_distribution, stratified_split
from urlsift.features import Featurizer
from urlsift.linear import train_logreg, train_multinomial_nb
from urlsift.metrics import ClassificationReport, ConfusionMatrix, classification_report, confusion_matrix, render_report
from urlsift.mlp import EpochLoss, train_mlp
from urlsift.store import ModelBundle
from urlsift.tokenizer import Tokenizer

log = logging.getLogger(__name__)


def fit_featurizer(train: LabeledDataset, cfg: FeatureConfig) -> Featurizer:
    tokenizer = Tokenizer(cfg.delimiters, cfg.max_token_len)
    return Featurizer.fit(train.urls, tokenizer, cfg.min_df, cfg.max_features, cfg.input_mode)


def train_model(kind: str, X, y, cfg: RunConfig, on_epoch=None):
    """Returns (model, mlp loss history or None)."""
    if kind == "nb":
        return train_multinomial_nb(X, y, cfg.nb.alpha), None
    if kind == "logreg":
        return train_logreg(X, y, cfg.logreg), None
    result = train_mlp(X, y, cfg.mlp, on_epoch=on_epoch)
    return result.params, result.history


@dataclass
class TrainRun:
    bundle: ModelBundle
    train: LabeledDataset
    test: LabeledDataset
    train_distribution: DistributionReport
    test_distribution: DistributionReport
    history: list[EpochLoss] | None = None


def train_bundle(dataset: LabeledDataset, cfg: RunConfig, on_epoch=None) -> TrainRun:
    train, test = stratified_split(dataset, cfg.split.test_fraction, cfg.split.seed)
    train.require_all_classes()
    featurizer = fit_featurizer(train, cfg.features)
    X = featurizer.transform(train.urls)
    log.info("features: %d train rows x %d columns, nnz=%d", X.shape[0], X.shape[1], X.nnz)
    model, history = train_model(cfg.model, X, train.labels, cfg, on_epoch)
    metadata = {
        "model": cfg.model,
        "split": asdict(cfg.split),
        "features": asdict(cfg.features),
        "hyperparameters": asdict(cfg.model_config),
        "dataset_digest": dataset.source_digest,
        "n_train": len(train),
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    bundle = ModelBundle(cfg.model, featurizer, model, json.loads(json.dumps(metadata)))
    return TrainRun(bundle, train, test, class_distribution(train), class_distribution(test), history)


@dataclass
class Evaluation:
    confusion: ConfusionMatrix
    report: ClassificationReport
    split_name: str
    warnings: list[str] = field(default_factory=list)
    header: list[str] = field(default_factory=list)

    def render(self, format: str = "text") -> str:
        head = "".join(f"# {line}\n" for line in self.header + [f"WARNING: {w}" for w in self.warnings])
        if format == "csv":
            return head + render_report(self.report, "csv") + "\n" + self.confusion.render_csv()
        return (head + "\n" + render_report(self.report, "text") + "\nconfusion matrix (rows = true, columns = predicted)\n"
                + self.confusion.render_text())


def bundle_split_config(bundle: ModelBundle) -> SplitConfig | None:
    split = bundle.metadata.get("split")
    return SplitConfig(**split) if split else None


def evaluate_predictions(y_true, y_pred) -> tuple[ConfusionMatrix, ClassificationReport]:
    cm = confusion_matrix(y_true, y_pred)
    return cm, classification_report(cm)


def evaluate_bundle(bundle: ModelBundle, dataset: LabeledDataset, split_cfg: SplitConfig | None = None,
                    on_train_split: bool = False) -> Evaluation:
    """Rebuild the seeded split and score the bundle on its test (or train) part."""
    warnings = []
    trained_split = bundle_split_config(bundle)
    if split_cfg is None:
        split_cfg = trained_split or SplitConfig()
    elif trained_split is not None and split_cfg != trained_split:
        warnings.append(f"split {asdict(split_cfg)} differs from the one the bundle was trained with "
                        f"{asdict(trained_split)}")
    digest = bundle.metadata.get("dataset_digest")
    if digest and digest != dataset.source_digest:
        warnings.append("dataset digest differs from the one recorded in the bundle")
    for w in warnings:
        log.warning(w)

    train, test = stratified_split(dataset, split_cfg.test_fraction, split_cfg.seed)
    part = train if on_train_split else test
    probs = bundle.predict_proba(part.urls)
    cm, report = evaluate_predictions(part.labels, np.argmax(probs, axis=1))
    split_name = "TRAIN SPLIT" if on_train_split else "TEST SPLIT"
    header = [
        f"model: {bundle.kind}",
        f"evaluated on: {split_name} ({len(part)} samples)",
        "effective config: " + json.dumps(
            {"split": asdict(split_cfg), "features": bundle.metadata.get("features"),
             "hyperparameters": bundle.metadata.get("hyperparameters")},
            sort_keys=True),
        f"dataset digest: {dataset.source_digest}",
    ]
    return Evaluation(cm, report, split_name, warnings, header)
