"""Stratified cross-validation and the feature-set / window ablation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .._parallel import chunked_map
from .features import FeatureConfig, FeatureIndex, build_instances, feature_matrix
from .logistic import Hyperparams, train_logistic
from .metrics import all_metrics

log = logging.getLogger(__name__)

METRICS = ("cwa", "auc", "avg_precision", "avg_recall", "f_measure")


class FoldError(ValueError):
    pass


def stratified_folds(y, folds: int, seed: int) -> np.ndarray:
    """Fold id per instance; each class is shuffled and dealt round-robin."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    y = np.asarray(y)
    rng = np.random.Generator(np.random.PCG64(seed))
    assign = np.empty(len(y), dtype=int)
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        idx = idx[np.argsort(rng.random(len(idx)), kind="stable")]
        assign[idx] = np.arange(len(idx)) % folds
    for f in range(folds):
        test = y[assign == f]
        train = y[assign != f]
        for part, name in ((test, "test"), (train, "train")):
            if np.unique(part).size < 2:
                raise FoldError(f"fold {f} {name} split is missing a class; use more data or another seed")
    return assign


@dataclass
class ModelReport:
    feature_names: list
    folds: list = field(default_factory=list)  # per-fold metric dicts
    weights: list = field(default_factory=list)  # per-fold (weights, bias)
    n_instances: int = 0
    n_positive: int = 0

    @property
    def mean(self) -> dict:
        return {m: float(np.mean([f[m] for f in self.folds])) for m in METRICS}

    def to_dict(self) -> dict:
        return {
            "features": list(self.feature_names),
            "n_instances": self.n_instances,
            "n_positive": self.n_positive,
            "mean": self.mean,
            "folds": self.folds,
            "weights": [
                {"bias": b, **dict(zip(self.feature_names, w))} for w, b in self.weights
            ],
        }


def evaluate(X, y, names=None, folds: int = 5, seed: int = 0, hp: Hyperparams = Hyperparams(), threads: int = 1) -> ModelReport:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    names = list(names) if names is not None else [f"x{i}" for i in range(X.shape[1])]
    assign = stratified_folds(y, folds, seed)

    def run(f):
        train, test = assign != f, assign == f
        model = train_logistic(X[train], y[train], hp)
        scores = model.predict_proba(X[test])
        return all_metrics(scores, y[test]), (
            [float(v) for v in model.weights], float(model.bias)
        )

    results = chunked_map(run, range(folds), threads, chunk=1)
    report = ModelReport(names, n_instances=len(y), n_positive=int(y.sum()))
    for metrics, wb in results:
        report.folds.append(metrics)
        report.weights.append(wb)
    return report


def evaluate_config(graph, demographics, config: FeatureConfig, folds=5, seed=0, hp=Hyperparams(), threads=1, instances=None, index=None) -> ModelReport:
    if instances is None:
        instances = build_instances(graph)
    if index is None:
        index = FeatureIndex(graph)
    fm = feature_matrix(instances, index, demographics, config, threads)
    if fm.skipped:
        log.info("%s: skipped %d instances with missing demographics", config.label, len(fm.skipped))
    return evaluate(fm.X, fm.y, fm.names, folds, seed, hp, threads)


DEFAULT_ABLATION = (
    FeatureConfig(True, False, False),
    FeatureConfig(True, True, False),
    FeatureConfig(True, False, True),
    FeatureConfig(True, True, True),
)


def feature_ablation(graph, demographics, configs=DEFAULT_ABLATION, k_values=range(0, 26), folds=5, seed=0, hp=Hyperparams(), threads=1) -> list:
    """``[(config, ModelReport)]`` for every feature set and window K.

    Feature sets without trade features ignore K and yield a single row.
    """
    configs = list(configs)
    if not configs:
        raise ValueError("no feature configurations given")
    instances = build_instances(graph)
    index = FeatureIndex(graph)
    rows = []
    for base in configs:
        ks = list(k_values) if base.include_trade else [0]
        for k in ks:
            cfg = FeatureConfig(base.include_trust, base.include_trade, base.include_homophily, k)
            rows.append((cfg, evaluate_config(
                graph, demographics, cfg, folds, seed, hp, threads, instances=instances, index=index
            )))
    return rows
