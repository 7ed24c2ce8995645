import json

import numpy as np
import pytest

from usability_ga.baselines import (
    DEFAULT_BASELINES,
    BaselineSpec,
    DecisionTree,
    GaussianNB,
    compare_models,
    predict,
    train,
)
from usability_ga.svm import SvmSpec

KINDS = ["knn", "gaussian_nb", "tree", "forest", "logreg"]


@pytest.mark.parametrize("kind", KINDS)
def test_fits_clusters(kind, three_clusters):
    fm = three_clusters
    m = train(kind, fm.values, fm.labels, 0, 3)
    acc = np.mean(predict(m, fm.values) == fm.labels)
    assert acc >= 0.95
    assert predict(m, fm.values[0]) in (0, 1, 2)
    s = m.decision_scores(fm.values)
    assert s.shape == (90, 3)


@pytest.mark.parametrize("kind", KINDS)
def test_deterministic(kind, separable_binary):
    fm = separable_binary
    a = train(kind, fm.values, fm.labels, 3, 2).decision_scores(fm.values)
    b = train(kind, fm.values, fm.labels, 3, 2).decision_scores(fm.values)
    assert np.array_equal(a, b)


def test_unknown_kind():
    with pytest.raises(ValueError):
        BaselineSpec("svm_rbf")


def test_tree_pure_and_depth():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([0, 0, 1, 1])
    t = DecisionTree(X, y, 2, max_depth=1)
    assert t.predict(X).tolist() == [0, 0, 1, 1]
    assert t.predict(np.array([[1.5]])).tolist() == [1] or t.predict(np.array([[1.4]])).tolist() == [0]


def test_gaussian_nb_constant_feature():
    X = np.array([[0.0, 1.0], [0.1, 1.0], [0.9, 1.0], [1.0, 1.0]])
    y = np.array([0, 0, 1, 1])
    nb = GaussianNB(X, y, 2)
    assert np.all(np.isfinite(nb.decision_scores(X)))
    assert nb.predict(X).tolist() == [0, 0, 1, 1]


def test_compare_models(three_clusters):
    specs = [SvmSpec()] + list(DEFAULT_BASELINES)
    t = compare_models(specs, three_clusters, 3, 0)
    assert len(t.rows) == 6
    accs = [r.accuracy for r in t.rows]
    assert accs == sorted(accs, reverse=True)
    assert all(0 <= a <= 1 for a in accs)
    assert t.to_csv().count("\n") == 7
    assert len(json.loads(t.to_json())) == 6
    assert compare_models(specs, three_clusters, 3, 0).to_csv() == t.to_csv()
