"""GA wrapper feature selection with a cross-validated SVM as the fitness."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import EmptyMask, FeatureUniverseMismatch
from .ga import EvolutionTrace, GaConfig, evolve
from .evaluation import kfold_indices
from .rng import RngSpec, as_rng
from .scoring import FeatureScoreTable
from .survey import FeatureMatrix
from .svm import SvmConfig, cv_accuracy

Mask = tuple[int, ...]

DEFAULT_SELECTION_GA = GaConfig(
    population_size=20,
    gene_count=1,
    crossover_rate=0.8,
    mutation_rate=0.05,
    max_generations=30,
    elitism=2,
    gene_low=0,
    gene_high=1,
)


def _as_mask(mask: Sequence) -> Mask:
    m = tuple(int(bool(b)) for b in mask)
    if not any(m):
        raise EmptyMask("a feature mask needs at least one selected feature")
    return m


class MaskEvaluator:
    """Cached CV accuracy of the SVM restricted to a mask's columns.

    The fold partition is drawn once, so every mask is judged on the same
    splits. ``penalty`` subtracts ``penalty * popcount / D`` from the accuracy.
    """

    def __init__(
        self,
        fm: FeatureMatrix,
        svm_cfg: SvmConfig = SvmConfig(),
        folds: int = 5,
        rng: RngSpec | int | None = None,
        penalty: float = 0.0,
    ):
        if fm.labels is None:
            raise ValueError("feature matrix has no labels")
        if folds < 2:
            raise ValueError("folds must be >= 2")
        self.fm = fm
        self.svm_cfg = svm_cfg
        self.penalty = penalty
        rng = as_rng(rng)
        self.parts = kfold_indices(fm.n, folds, rng.child("cv"), fm.labels)
        self._train_rng = rng.child("train")
        self._cache: dict[Mask, float] = {}

    def accuracy(self, mask: Sequence) -> float:
        m = _as_mask(mask)
        if len(m) != self.fm.d:
            raise ValueError(f"mask has {len(m)} bits for {self.fm.d} features")
        if m not in self._cache:
            X = self.fm.values[:, np.asarray(m, dtype=bool)]
            self._cache[m] = cv_accuracy(
                X, self.fm.labels, self.svm_cfg, self.parts, self._train_rng, len(self.fm.class_names)
            )
        return self._cache[m]

    def __call__(self, mask: Sequence) -> float:
        m = _as_mask(mask)
        return self.accuracy(m) - self.penalty * sum(m) / len(m)

    @property
    def cache_size(self) -> int:
        return len(self._cache)


def mask_fitness(
    mask: Sequence,
    fm: FeatureMatrix,
    svm_cfg: SvmConfig = SvmConfig(),
    folds: int = 5,
    rng: RngSpec | int | None = None,
    penalty: float = 0.0,
) -> float:
    return MaskEvaluator(fm, svm_cfg, folds, rng, penalty)(mask)


def repair_mask(genes: Mask, r: random.Random) -> Mask:
    if any(genes):
        return genes
    g = list(genes)
    g[r.randrange(len(g))] = 1
    return tuple(g)


@dataclass(frozen=True)
class SelectionResult:
    best_mask: Mask
    cv_accuracy: float
    fitness: float
    per_feature_frequency: tuple[float, ...]
    feature_names: tuple[str, ...]
    trace: EvolutionTrace = field(compare=False)

    @property
    def selected(self) -> tuple[str, ...]:
        return tuple(f for f, b in zip(self.feature_names, self.best_mask) if b)

    def to_dict(self) -> dict:
        return {
            "features": list(self.feature_names),
            "mask": list(self.best_mask),
            "selected": list(self.selected),
            "cv_accuracy": self.cv_accuracy,
            "fitness": self.fitness,
            "frequency": list(self.per_feature_frequency),
            "generations": len(self.trace) - 1,
            "trace": "trace.csv",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def select_features(
    fm: FeatureMatrix,
    svm_cfg: SvmConfig = SvmConfig(),
    ga_cfg: GaConfig = DEFAULT_SELECTION_GA,
    folds: int = 5,
    rng: RngSpec | int | None = None,
    penalty: float = 0.0,
    evaluator: MaskEvaluator | None = None,
) -> SelectionResult:
    """Evolve feature masks. Generation 0 holds the full mask and every
    singleton mask (as many as fit). Ties on fitness go to fewer features,
    then to masks that keep earlier columns."""
    if fm.d < 2:
        raise ValueError("feature selection needs at least two features")
    rng = as_rng(rng)
    ev = evaluator or MaskEvaluator(fm, svm_cfg, folds, rng, penalty)
    d = fm.d
    cfg = replace(ga_cfg, gene_count=d, gene_low=0, gene_high=1)
    seeds = [tuple([1] * d)] + [tuple(int(k == j) for k in range(d)) for j in range(d)]
    _, trace = evolve(ev, cfg, rng.child("ga"), initial=seeds, repair=repair_mask)

    def key(item):
        mask, fit = item
        return (-fit, sum(mask), tuple(-b for b in mask))

    best_mask, best_fit = min(trace.evaluated, key=key)
    freq = np.mean(np.asarray(trace.final_population, dtype=float), axis=0)
    return SelectionResult(
        best_mask,
        ev.accuracy(best_mask),
        best_fit,
        tuple(float(f) for f in freq),
        fm.feature_names,
        trace,
    )


@dataclass(frozen=True)
class SelectionRow:
    feature: str
    score: float
    selected: bool
    frequency: float


def selection_report(r: SelectionResult, scores: FeatureScoreTable) -> list[SelectionRow]:
    if set(r.feature_names) != set(scores.features):
        raise FeatureUniverseMismatch(
            f"selection covers {sorted(r.feature_names)}, scores cover {sorted(scores.features)}"
        )
    idx = {f: i for i, f in enumerate(r.feature_names)}
    return [
        SelectionRow(f, s, bool(r.best_mask[idx[f]]), r.per_feature_frequency[idx[f]])
        for f, s in scores.rows
    ]
