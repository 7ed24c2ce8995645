"""Baseline classifiers written from scratch and a shared-fold comparison.

Every fitted model exposes ``predict`` (class ids; ties go to the lowest id)
and ``decision_scores`` (N x K, higher = more likely).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, NonFiniteFeature, SingleClassInput
from .evaluation import PipelineEvaluation, evaluate_pipeline, kfold_indices
from .rng import RngSpec, as_rng
from .survey import FeatureMatrix

VAR_FLOOR = 1e-9

DEFAULT_PARAMS: dict[str, dict[str, Any]] = {
    "knn": {"k": 5},
    "gaussian_nb": {},
    "tree": {"max_depth": 10},
    "forest": {"n_trees": 100, "max_depth": 10},
    "logreg": {"learning_rate": 0.1, "epochs": 500},
}


def _prep(X, labels=None, need_two=True):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch("X must be 2-D")
    if not np.isfinite(X).all():
        raise NonFiniteFeature("X contains NaN or infinite values")
    if labels is None:
        return X
    y = np.asarray(labels, dtype=np.int64)
    if len(y) != len(X) or len(y) == 0:
        raise DimensionMismatch("X and labels lengths differ or are empty")
    if need_two and len(np.unique(y)) < 2:
        raise SingleClassInput("need at least two classes")
    return X, y


class _Base:
    n_classes: int
    n_features: int

    def _check(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"{X.shape[1]} != {self.n_features}")
        return X

    def predict(self, X):
        return np.argmax(self.decision_scores(X), axis=1)


# ---------------------------------------------------------------------------


class KNN(_Base):
    def __init__(self, X, y, n_classes, k=5):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.X, self.y, self.k = X, y, k
        self.n_classes, self.n_features = n_classes, X.shape[1]

    def decision_scores(self, X):
        X = self._check(X)
        k = min(self.k, len(self.X))
        d = ((X[:, None, :] - self.X[None, :, :]) ** 2).sum(-1)
        near = np.argsort(d, axis=1, kind="stable")[:, :k]
        votes = np.zeros((len(X), self.n_classes))
        for col in range(k):
            np.add.at(votes, (np.arange(len(X)), self.y[near[:, col]]), 1)
        return votes / k


class GaussianNB(_Base):
    def __init__(self, X, y, n_classes):
        self.n_classes, self.n_features = n_classes, X.shape[1]
        self.present = np.zeros(n_classes, dtype=bool)
        self.mean = np.zeros((n_classes, X.shape[1]))
        self.var = np.ones((n_classes, X.shape[1]))
        self.log_prior = np.full(n_classes, -np.inf)
        for c in np.unique(y):
            Xc = X[y == c]
            self.present[c] = True
            self.mean[c] = Xc.mean(0)
            self.var[c] = np.maximum(Xc.var(0), VAR_FLOOR)
            self.log_prior[c] = math.log(len(Xc) / len(X))

    def log_joint(self, X):
        X = self._check(X)
        ll = -0.5 * (
            np.log(2 * np.pi * self.var)[None] + (X[:, None, :] - self.mean[None]) ** 2 / self.var[None]
        ).sum(-1)
        return ll + self.log_prior[None]

    def decision_scores(self, X):
        lj = self.log_joint(X)
        lj = lj - lj.max(axis=1, keepdims=True)
        p = np.exp(lj)
        return p / p.sum(axis=1, keepdims=True)


@dataclass
class _Node:
    dist: np.ndarray
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None


def _gini(counts: np.ndarray) -> np.ndarray:
    tot = counts.sum(-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(tot > 0, counts / tot, 0.0)
    return 1.0 - (p * p).sum(-1)


class DecisionTree(_Base):
    """CART on Gini impurity. Thresholds are midpoints between consecutive
    distinct values; ties go to the lower feature index, then the lower
    threshold. ``max_features`` enables per-split feature subsampling."""

    def __init__(self, X, y, n_classes, max_depth=10, max_features=None, rng=None):
        self.n_classes, self.n_features = n_classes, X.shape[1]
        self.max_depth = max_depth
        self.max_features = max_features
        self._g = rng
        self.root = self._grow(X, y, 0)

    def _dist(self, y):
        return np.bincount(y, minlength=self.n_classes).astype(float)

    def _best_split(self, X, y):
        n = len(y)
        onehot = np.eye(self.n_classes)[y]
        parent = _gini(onehot.sum(0))
        feats = np.arange(X.shape[1])
        if self.max_features is not None and self.max_features < len(feats):
            feats = np.sort(self._g.choice(feats, self.max_features, replace=False))
        best = (parent - 1e-12, -1, 0.0)
        for f in feats:
            order = np.argsort(X[:, f], kind="stable")
            xs = X[order, f]
            left = np.cumsum(onehot[order], axis=0)[:-1]
            right = onehot.sum(0)[None] - left
            valid = xs[1:] > xs[:-1]
            if not valid.any():
                continue
            nl = np.arange(1, n)
            score = (nl * _gini(left) + (n - nl) * _gini(right)) / n
            score = np.where(valid, score, np.inf)
            pos = int(np.argmin(score))
            if score[pos] < best[0]:
                best = (score[pos], int(f), (xs[pos] + xs[pos + 1]) / 2.0)
        return best[1], best[2]

    def _grow(self, X, y, depth):
        node = _Node(self._dist(y))
        if depth >= self.max_depth or len(np.unique(y)) < 2:
            return node
        f, t = self._best_split(X, y)
        if f < 0:
            return node
        go_left = X[:, f] <= t
        node.feature, node.threshold = f, t
        node.left = self._grow(X[go_left], y[go_left], depth + 1)
        node.right = self._grow(X[~go_left], y[~go_left], depth + 1)
        return node

    def decision_scores(self, X):
        X = self._check(X)
        out = np.empty((len(X), self.n_classes))
        for i, x in enumerate(X):
            node = self.root
            while node.left is not None:
                node = node.left if x[node.feature] <= node.threshold else node.right
            out[i] = node.dist / node.dist.sum()
        return out


class RandomForest(_Base):
    def __init__(self, X, y, n_classes, n_trees=100, max_depth=10, rng: RngSpec | None = None):
        if n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        rng = as_rng(rng)
        self.n_classes, self.n_features = n_classes, X.shape[1]
        m = max(1, int(math.sqrt(X.shape[1])))
        self.trees = []
        for t in range(n_trees):
            g = rng.numpy("tree", t)
            idx = g.integers(0, len(X), len(X))
            self.trees.append(DecisionTree(X[idx], y[idx], n_classes, max_depth, m, g))

    def decision_scores(self, X):
        X = self._check(X)
        votes = np.zeros((len(X), self.n_classes))
        for tree in self.trees:
            np.add.at(votes, (np.arange(len(X)), tree.predict(X)), 1)
        return votes / len(self.trees)


class LogisticRegression(_Base):
    """Multinomial (softmax) regression fitted by full-batch gradient descent
    from zero weights."""

    def __init__(self, X, y, n_classes, learning_rate=0.1, epochs=500):
        self.n_classes, self.n_features = n_classes, X.shape[1]
        W = np.zeros((X.shape[1], n_classes))
        b = np.zeros(n_classes)
        Y = np.eye(n_classes)[y]
        for _ in range(epochs):
            P = _softmax(X @ W + b)
            G = (P - Y) / len(X)
            W -= learning_rate * X.T @ G
            b -= learning_rate * G.sum(0)
        self.W, self.b = W, b

    def decision_scores(self, X):
        return _softmax(self._check(X) @ self.W + self.b)


def _softmax(Z):
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------


def train(
    kind: str,
    X: np.ndarray,
    labels: Sequence[int],
    rng: RngSpec | int | None = None,
    n_classes: int | None = None,
    **params,
) -> _Base:
    if kind not in DEFAULT_PARAMS:
        raise ValueError(f"unknown baseline {kind!r}")
    p = {**DEFAULT_PARAMS[kind], **params}
    X, y = _prep(X, labels, need_two=kind != "knn")
    n_classes = int(y.max()) + 1 if n_classes is None else n_classes
    if kind == "knn":
        return KNN(X, y, n_classes, **p)
    if kind == "gaussian_nb":
        return GaussianNB(X, y, n_classes)
    if kind == "tree":
        return DecisionTree(X, y, n_classes, **p)
    if kind == "forest":
        return RandomForest(X, y, n_classes, rng=as_rng(rng), **p)
    return LogisticRegression(X, y, n_classes, **p)


def predict(m: _Base, x: np.ndarray) -> int | np.ndarray:
    x = np.asarray(x, dtype=float)
    out = m.predict(x)
    return int(out[0]) if x.ndim == 1 else out


@dataclass(frozen=True)
class BaselineSpec:
    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.kind not in DEFAULT_PARAMS:
            raise ValueError(f"unknown baseline {self.kind!r}")
        if not self.name:
            object.__setattr__(self, "name", self.kind)

    def fit(self, X, labels, rng, n_classes):
        return train(self.kind, X, labels, rng, n_classes, **dict(self.params))


DEFAULT_BASELINES = tuple(BaselineSpec(k) for k in DEFAULT_PARAMS)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    accuracy: float
    precision: float | None
    recall: float | None
    auc: float | None


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[ComparisonRow, ...]
    folds: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    evaluations: Mapping[str, PipelineEvaluation] = field(default_factory=dict, compare=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "accuracy", "precision", "recall", "auc"])
        for r in self.rows:
            w.writerow([r.name, *("" if v is None else repr(v) for v in (r.accuracy, r.precision, r.recall, r.auc))])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps([r.__dict__ for r in self.rows], indent=2)


def compare_models(
    models: Sequence,
    fm: FeatureMatrix,
    folds: int = 10,
    rng: RngSpec | int | None = None,
) -> ComparisonTable:
    """Cross-validate every model on one shared fold partition and seed; rows
    are sorted by accuracy, descending (stable for ties)."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    rng = as_rng(rng)
    parts = kfold_indices(fm.n, folds, rng.child("cv"), fm.labels)
    rows, evals = [], {}
    for m in models:
        ev = evaluate_pipeline(fm, m, parts, rng.child("compare"))
        evals[m.name] = ev
        r = ev.report
        rows.append(ComparisonRow(m.name, r.accuracy, r.macro_precision, r.macro_recall, r.macro_auc))
    rows.sort(key=lambda r: -r.accuracy)
    frozen = tuple((tuple(map(int, tr)), tuple(map(int, te))) for tr, te in parts)
    return ComparisonTable(tuple(rows), frozen, evals)
