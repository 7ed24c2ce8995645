"""Splitting, k-fold partitions, confusion matrices and classification metrics.

Confusion matrices are stored predicted-by-true: ``counts[p][t]``. Class
precision is therefore a row ratio and class recall a column ratio.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .errors import (
    ClassTooSmall,
    EmptyMatrix,
    LengthMismatch,
    TooFewSamples,
    UnknownClass,
)
from .rng import RngSpec, as_rng
from .survey import FeatureMatrix, largest_remainder

PASS_ACCURACY = 0.80


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    seed: RngSpec = field(default_factory=RngSpec)
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        object.__setattr__(self, "seed", as_rng(self.seed))


def _class_groups(labels: np.ndarray, g: np.random.Generator) -> list[np.ndarray]:
    return [g.permutation(np.flatnonzero(labels == c)) for c in np.unique(labels)]


def split_indices(
    n: int, spec: SplitSpec, labels: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    if n < 2:
        raise TooFewSamples("need at least two samples to split")
    g = spec.seed.numpy("split")
    # the epsilon keeps 90 * 0.7 = 62.999... from flooring to 62
    n_train = min(max(int(np.floor(n * spec.train_fraction + 1e-9)), 1), n - 1)
    if not spec.stratified or labels is None:
        perm = g.permutation(n)
        return np.sort(perm[:n_train]), np.sort(perm[n_train:])

    labels = np.asarray(labels)
    groups = _class_groups(labels, g)
    sizes = [len(grp) for grp in groups]
    if min(sizes) < 2:
        raise ClassTooSmall("stratified split needs at least two members per class")
    # largest remainder keeps every class within one sample of its share
    alloc = [min(max(int(a), 1), s - 1) for a, s in zip(largest_remainder(sizes, n_train), sizes)]
    # clamping (every class keeps a member on each side) can shift the total;
    # hand the difference to the classes furthest from their exact share
    quota = [s * n_train / n for s in sizes]
    while sum(alloc) != n_train:
        step = 1 if sum(alloc) < n_train else -1
        room = [c for c in range(len(sizes)) if 1 <= alloc[c] + step <= sizes[c] - 1]
        if not room:
            break
        c = max(room, key=lambda c: step * (quota[c] - alloc[c]))
        alloc[c] += step
    train, test = [], []
    for grp, a in zip(groups, alloc):
        train.append(grp[:a])
        test.append(grp[a:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split(fm: FeatureMatrix, spec: SplitSpec = SplitSpec()) -> tuple[FeatureMatrix, FeatureMatrix]:
    tr, te = split_indices(fm.n, spec, fm.labels)
    return fm.rows(tr), fm.rows(te)


def kfold_indices(
    n: int,
    k: int,
    rng: RngSpec | int | None = None,
    labels: Sequence[int] | np.ndarray | None = None,
    stratified: bool = True,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """``k`` (train, test) index pairs whose test folds partition ``range(n)``.

    Stratification deals each class's shuffled members round-robin over the
    folds, continuing where the previous class stopped, so fold sizes differ by
    at most one both overall and per class.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if n < k:
        raise TooFewSamples(f"{n} samples cannot fill {k} folds")
    g = as_rng(rng).numpy("kfold", k)
    if stratified and labels is not None:
        order = np.concatenate(_class_groups(np.asarray(labels), g))
    else:
        order = g.permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[order] = np.arange(n) % k
    all_idx = np.arange(n)
    return [(all_idx[fold_of != f], all_idx[fold_of == f]) for f in range(k)]


def kfold(fm: FeatureMatrix, k: int, spec: SplitSpec = SplitSpec()) -> list[tuple[np.ndarray, np.ndarray]]:
    return kfold_indices(fm.n, k, spec.seed, fm.labels, spec.stratified)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # K x K, [predicted, true]
    class_names: tuple[str, ...]

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        k = len(self.class_names)
        if c.shape != (k, k):
            raise ValueError(f"counts must be {k}x{k}")
        if (c < 0).any():
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.class_names != other.class_names:
            raise ValueError("class sets differ")
        return ConfusionMatrix(self.counts + other.counts, self.class_names)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["predicted/true", *self.class_names])
        for name, row in zip(self.class_names, self.counts):
            w.writerow([name, *(int(v) for v in row)])
        return buf.getvalue()


def _as_ids(labels: Sequence, class_names: Sequence[str]) -> np.ndarray:
    k = len(class_names)
    out = np.empty(len(labels), dtype=np.int64)
    index = {name: i for i, name in enumerate(class_names)}
    for n, lab in enumerate(labels):
        if isinstance(lab, str):
            if lab not in index:
                raise UnknownClass(lab)
            out[n] = index[lab]
        else:
            if not 0 <= int(lab) < k:
                raise UnknownClass(lab)
            out[n] = int(lab)
    return out


def confusion(pred: Sequence, truth: Sequence, class_names: Sequence[str]) -> ConfusionMatrix:
    if len(pred) != len(truth) or len(pred) == 0:
        raise LengthMismatch(f"pred has {len(pred)} entries, truth has {len(truth)}")
    p = _as_ids(pred, class_names)
    t = _as_ids(truth, class_names)
    k = len(class_names)
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (p, t), 1)
    return ConfusionMatrix(counts, tuple(class_names))


def roc_auc(scores: Sequence[float], positive: Sequence[bool]) -> float | None:
    """Area under the ROC curve by the trapezoidal rule; tied scores form one
    diagonal segment. ``None`` when either class is absent."""
    s = np.asarray(scores, dtype=float)
    pos = np.asarray(positive, dtype=bool)
    n_pos = int(pos.sum())
    n_neg = len(pos) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    order = np.argsort(-s, kind="mergesort")
    s, pos = s[order], pos[order]
    # cut points at the last index of each distinct score
    last = np.r_[np.flatnonzero(s[1:] != s[:-1]), len(s) - 1]
    tps = np.cumsum(pos)[last]
    fps = (last + 1) - tps
    tpr = np.r_[0.0, tps / n_pos]
    fpr = np.r_[0.0, fps / n_neg]
    return float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))


def _ratio(num: float, den: float) -> float | None:
    return None if den == 0 else float(num) / float(den)


def _mean_defined(vals: Sequence[float | None]) -> float | None:
    vals = [v for v in vals if v is not None]
    return float(np.mean(vals)) if vals else None


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    class_names: tuple[str, ...]
    precision: tuple[float | None, ...]
    recall: tuple[float | None, ...]
    specificity: tuple[float | None, ...]
    auc: tuple[float | None, ...] | None = None

    @property
    def macro_precision(self) -> float | None:
        return _mean_defined(self.precision)

    @property
    def macro_recall(self) -> float | None:
        return _mean_defined(self.recall)

    @property
    def macro_auc(self) -> float | None:
        return None if self.auc is None else _mean_defined(self.auc)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "classes": list(self.class_names),
            "precision": list(self.precision),
            "recall": list(self.recall),
            "specificity": list(self.specificity),
            "auc": None if self.auc is None else list(self.auc),
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_auc": self.macro_auc,
        }


def metrics(
    cm: ConfusionMatrix,
    scores: np.ndarray | None = None,
    truth: Sequence | None = None,
) -> MetricsReport:
    """Accuracy, per-class precision/recall/specificity and optional one-vs-rest
    AUC. Ratios with a zero denominator are reported as ``None``.

    ``scores`` is an N x K matrix of per-class decision scores aligned with
    ``truth``; both are needed for AUC.
    """
    total = cm.total
    if total == 0:
        raise EmptyMatrix("confusion matrix has no counts")
    c = cm.counts
    diag = np.diag(c)
    rows = c.sum(axis=1)
    cols = c.sum(axis=0)
    precision = tuple(_ratio(diag[i], rows[i]) for i in range(len(diag)))
    recall = tuple(_ratio(diag[i], cols[i]) for i in range(len(diag)))
    tn = total - rows - cols + diag
    specificity = tuple(_ratio(tn[i], total - cols[i]) for i in range(len(diag)))
    auc = None
    if scores is not None:
        if truth is None:
            raise ValueError("AUC needs the true labels alongside the scores")
        t = _as_ids(truth, cm.class_names)
        sc = np.asarray(scores, dtype=float)
        if sc.shape != (len(t), len(cm.class_names)):
            raise LengthMismatch("scores must be N x K")
        auc = tuple(roc_auc(sc[:, k], t == k) for k in range(len(cm.class_names)))
    return MetricsReport(float(diag.sum()) / total, cm.class_names, precision, recall, specificity, auc)


# ---------------------------------------------------------------------------


class Fitted(Protocol):
    def predict(self, X: np.ndarray) -> np.ndarray: ...
    def decision_scores(self, X: np.ndarray) -> np.ndarray: ...


class ModelSpec(Protocol):
    name: str

    def fit(self, X: np.ndarray, labels: np.ndarray, rng: RngSpec, n_classes: int) -> Fitted: ...


@dataclass(frozen=True)
class PipelineEvaluation:
    confusion: ConfusionMatrix
    report: MetricsReport
    predictions: np.ndarray
    fold_accuracy: tuple[float, ...]

    @property
    def meets_threshold(self) -> bool:
        return self.report.accuracy > PASS_ACCURACY


def evaluate_pipeline(
    fm: FeatureMatrix,
    model: ModelSpec,
    folds: int | list[tuple[np.ndarray, np.ndarray]] = 10,
    rng: RngSpec | int | None = None,
) -> PipelineEvaluation:
    """Cross-validate ``model`` and pool every test-fold prediction into one
    confusion matrix. ``folds`` is either k or a precomputed partition."""
    if fm.labels is None:
        raise ValueError("feature matrix has no labels")
    rng = as_rng(rng)
    parts = kfold_indices(fm.n, folds, rng, fm.labels) if isinstance(folds, int) else folds
    k = len(fm.class_names)
    pred = np.full(fm.n, -1, dtype=np.int64)
    scores = np.zeros((fm.n, k))
    fold_acc = []
    for f, (tr, te) in enumerate(parts):
        fitted = model.fit(fm.values[tr], fm.labels[tr], rng.child("fold", f), k)
        pred[te] = fitted.predict(fm.values[te])
        scores[te] = fitted.decision_scores(fm.values[te])
        fold_acc.append(float(np.mean(pred[te] == fm.labels[te])))
    tested = pred >= 0
    cm = confusion(pred[tested], fm.labels[tested], fm.class_names)
    rep = metrics(cm, scores[tested], fm.labels[tested])
    return PipelineEvaluation(cm, rep, pred, tuple(fold_acc))


def metrics_json(ev: PipelineEvaluation) -> str:
    d = ev.report.to_dict()
    d["meets_threshold"] = ev.meets_threshold
    d["fold_accuracy"] = list(ev.fold_accuracy)
    d["total"] = ev.confusion.total
    return json.dumps(d, indent=2, sort_keys=True)
