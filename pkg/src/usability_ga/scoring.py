"""GA scoring of usability features.

Each feature gets a weight in [0, 1]. A respondent's residue is the gap
between their overall recommendation target and the weighted sum of their
encoded feature values; the run minimises the root-mean-square residue
``R`` by maximising ``F = 1 / (1 + R)``. The best weights are the scores.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch
from .ga import EvolutionTrace, GaConfig, evolve, fitness_from_objective
from .rng import RngSpec, as_rng
from .survey import FeatureMatrix, class_targets

log = logging.getLogger(__name__)

DEFAULT_SCORING_GA = GaConfig(
    population_size=40,
    gene_count=1,
    crossover_rate=0.8,
    mutation_rate=0.05,
    max_generations=300,
    elitism=2,
)


@dataclass(frozen=True)
class ScoringProblem:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    weight_resolution: float = 0.01

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise DimensionMismatch("X must be N x D and y length N")
        if X.shape[1] != len(self.feature_names):
            raise DimensionMismatch("feature_names length does not match X")
        if ((y < 0) | (y > 1)).any():
            raise ValueError("targets must lie in [0, 1]")
        steps = 1.0 / self.weight_resolution
        if not self.weight_resolution > 0 or abs(steps - round(steps)) > 1e-9:
            raise ValueError("weight_resolution must divide 1 evenly")
        if X.shape[0] < X.shape[1]:
            log.warning("scoring problem has fewer respondents (%d) than features (%d)", *X.shape)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @classmethod
    def from_matrix(cls, fm: FeatureMatrix, weight_resolution: float = 0.01) -> "ScoringProblem":
        return cls(fm.values, class_targets(fm), fm.feature_names, weight_resolution)

    @property
    def levels(self) -> int:
        return int(round(1.0 / self.weight_resolution))

    def weights(self, genes: Sequence[int]) -> np.ndarray:
        return np.asarray(genes, dtype=float) / self.levels


@dataclass(frozen=True)
class ScoringFitness:
    R: float
    F: float


def residuals(w: Sequence[float], problem: ScoringProblem) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (problem.X.shape[1],):
        raise DimensionMismatch(f"expected {problem.X.shape[1]} weights, got {w.shape}")
    return problem.y - problem.X @ w


def fitness_from_residuals(r: Sequence[float]) -> ScoringFitness:
    r = np.asarray(r, dtype=float)
    R = float(math.sqrt(float(r @ r) / len(r)))
    return ScoringFitness(R, fitness_from_objective(R))


def total_residual(w: Sequence[float], problem: ScoringProblem) -> ScoringFitness:
    return fitness_from_residuals(residuals(w, problem))


@dataclass(frozen=True)
class FeatureScoreTable:
    rows: tuple[tuple[str, float], ...]
    meta: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        rows = tuple((str(n), float(s)) for n, s in self.rows)
        if any(not 0.0 <= s <= 1.0 for _, s in rows):
            raise ValueError("scores must lie in [0, 1]")
        object.__setattr__(self, "rows", tuple(sorted(rows, key=lambda r: (-r[1], r[0]))))

    @classmethod
    def from_mapping(cls, scores: Mapping[str, float], meta: Mapping | None = None) -> "FeatureScoreTable":
        return cls(tuple(scores.items()), meta or {})

    @property
    def features(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.rows)

    def as_dict(self) -> dict[str, float]:
        return dict(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["feature", "score"])
        for name, s in self.rows:
            w.writerow([name, f"{s:.4f}"])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {"scores": [{"feature": n, "score": s} for n, s in self.rows], "meta": dict(self.meta)},
            indent=2,
            sort_keys=True,
        )


def export_score_table(t: FeatureScoreTable, path: str | Path) -> None:
    Path(path).write_text(t.to_csv(), encoding="utf-8")


def load_score_table(path: str | Path) -> FeatureScoreTable:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return FeatureScoreTable(tuple((r["feature"], float(r["score"])) for r in rows))


@dataclass(frozen=True)
class ScoringResult:
    table: FeatureScoreTable
    weights: np.ndarray
    fitness: ScoringFitness
    trace: EvolutionTrace


def score_features(
    problem: ScoringProblem,
    ga: GaConfig = DEFAULT_SCORING_GA,
    rng: RngSpec | int | None = None,
) -> ScoringResult:
    """Evolve quantised weights maximising ``F``. The all-equal-weights
    chromosome (``1/D`` each) is always part of the first generation."""
    rng = as_rng(rng)
    d = problem.X.shape[1]
    levels = problem.levels
    cfg = replace(ga, gene_count=d, gene_low=0, gene_high=levels)
    equal = tuple([int(round(levels / d))] * d)

    def fitness(genes):
        return total_residual(problem.weights(genes), problem).F

    best, trace = evolve(fitness, cfg, rng, initial=[equal])
    w = problem.weights(best.genes)
    fit = total_residual(w, problem)
    meta = {
        "seed": rng.master_seed,
        "generations": len(trace) - 1,
        "R": fit.R,
        "F": fit.F,
        "weight_resolution": problem.weight_resolution,
    }
    table = FeatureScoreTable(tuple(zip(problem.feature_names, w.tolist())), meta)
    return ScoringResult(table, w, fit, trace)
