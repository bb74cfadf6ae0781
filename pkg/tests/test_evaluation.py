import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recipnet.predict import (
    METRICS,
    FeatureConfig,
    FoldError,
    evaluate,
    feature_ablation,
    stratified_folds,
)
from recipnet.synth import SynthConfig, generate
from recipnet.model import build_graph


@settings(max_examples=100, deadline=None)
@given(st.integers(4, 40), st.integers(4, 40), st.integers(2, 4), st.integers(0, 1000))
def test_folds_are_stratified(n0, n1, k, seed):
    y = np.array([0] * n0 + [1] * n1)
    assign = stratified_folds(y, k, seed)
    for cls, n in ((0, n0), (1, n1)):
        sizes = np.bincount(assign[y == cls], minlength=k)
        assert sizes.max() - sizes.min() <= 1 and sizes.sum() == n
    assert np.array_equal(assign, stratified_folds(y, k, seed))


def test_fold_error():
    with pytest.raises(FoldError):
        stratified_folds([0] * 10 + [1] * 3, 5, 0)
    with pytest.raises(ValueError):
        stratified_folds([0, 1], 1, 0)


def test_evaluate_on_separable_signal():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(500, 2))
    y = (X[:, 0] + 0.3 * rng.normal(size=500) > 0).astype(int)
    r = evaluate(X, y, ["x0", "x1"], folds=5, seed=1)
    assert len(r.folds) == 5 and set(r.mean) == set(METRICS)
    assert r.mean["auc"] > 0.9
    d = r.to_dict()
    assert d["n_instances"] == 500 and set(d["weights"][0]) == {"bias", "x0", "x1"}
    assert evaluate(X, y, threads=4).to_dict() == evaluate(X, y, threads=1).to_dict()


@pytest.fixture(scope="module")
def small_synth():
    cfg = SynthConfig.from_dict({"n_players": 3000, "seed": 5,
                                 "chat": {"pairs": 4000}, "trade": {"pairs": 2000}, "trust": {"pairs": 1500}})
    events, demo, _ = generate(cfg)
    return build_graph(events, (cfg.start_ts, cfg.t_end)), demo


def test_ablation_rows(small_synth):
    g, demo = small_synth
    rows = feature_ablation(g, demo, k_values=[0, 5], folds=3)
    labels = [c.label for c, _ in rows]
    assert labels == ["trust", "trust+trade(K=0)", "trust+trade(K=5)", "trust+homophily",
                      "trust+trade(K=0)+homophily", "trust+trade(K=5)+homophily"]
    for cfg, rep in rows:
        assert 0.0 <= rep.mean["auc"] <= 1.0
    with pytest.raises(ValueError):
        feature_ablation(g, demo, configs=[])
    one = feature_ablation(g, demo, configs=[FeatureConfig(True, True)], k_values=[5], folds=3)
    assert one[0][1].to_dict() == rows[2][1].to_dict()
