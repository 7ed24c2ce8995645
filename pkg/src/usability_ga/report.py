"""Usability ranking: weight aggregation, benchmark deltas and verdicts."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyRuns, FeatureUniverseMismatch, NonMonotoneBands
from .scoring import FeatureScoreTable
from .selection import SelectionRow

REPORT_SCALE = 10.0


@dataclass(frozen=True)
class VerdictBands:
    """Verdict for a delta = label of the first band whose threshold is <= the
    delta; anything below the last threshold gets ``floor``."""

    bands: tuple[tuple[float, str], ...] = (
        (0.5, "Very good"),
        (0.0, "Good"),
        (-0.5, "Fair"),
        (-1.5, "Average"),
    )
    floor: str = "Poor"

    def __post_init__(self):
        bands = tuple((float(t), str(v)) for t, v in self.bands)
        ths = [t for t, _ in bands]
        if any(b >= a for a, b in zip(ths, ths[1:])):
            raise NonMonotoneBands("verdict thresholds must be strictly decreasing")
        object.__setattr__(self, "bands", bands)

    def verdict(self, delta: float) -> str:
        for t, label in self.bands:
            if delta >= t:
                return label
        return self.floor

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.bands) + (self.floor,)


@dataclass(frozen=True)
class WeightAggregate:
    mean: tuple[float, ...]
    threshold: float
    runs: int
    feature_names: tuple[str, ...] = ()

    @property
    def selected(self) -> tuple[int, ...]:
        return tuple(i for i, w in enumerate(self.mean) if w >= self.threshold)


def aggregate_weights(
    runs: Sequence[Sequence[float]],
    threshold: float = 0.0,
    feature_names: Sequence[str] = (),
) -> tuple[WeightAggregate, set]:
    """Mean weight per feature over ``J`` runs; features whose mean reaches
    ``threshold`` are selected (returned by name when names are given, else by
    0-based index)."""
    if not len(runs):
        raise EmptyRuns("need at least one weight vector")
    dims = {len(r) for r in runs}
    if len(dims) != 1:
        raise DimensionMismatch("weight vectors differ in length")
    W = np.asarray(runs, dtype=float)
    agg = WeightAggregate(tuple(W.mean(axis=0).tolist()), float(threshold), len(W), tuple(feature_names))
    if feature_names:
        return agg, {feature_names[i] for i in agg.selected}
    return agg, set(agg.selected)


@dataclass(frozen=True)
class ReportRow:
    feature: str
    score: float
    benchmark: float
    delta: float
    classification: float | None
    verdict: str
    selected: bool | None = None
    frequency: float | None = None


@dataclass(frozen=True)
class UsabilityReport:
    rows: tuple[ReportRow, ...]
    meta: Mapping = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"rows": [r.__dict__ for r in self.rows], "meta": dict(self.meta)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["feature", "score", "benchmark", "delta", "classification", "verdict", "selected", "frequency"]
        w.writerow(cols)
        for r in self.rows:
            w.writerow(["" if getattr(r, c) is None else getattr(r, c) for c in cols])
        return buf.getvalue()


def rescale(score: float) -> float:
    # rounding strips binary noise such as 0.7 * 10 = 7.000000000000001
    return round(score * REPORT_SCALE, 10)


def build_report(
    scores: FeatureScoreTable,
    bench: Mapping[str, float],
    classification: Mapping[str, float] | None = None,
    bands: VerdictBands = VerdictBands(),
    selection: Sequence[SelectionRow] = (),
    meta: Mapping | None = None,
) -> UsabilityReport:
    """One row per feature with the score on the 0-10 scale, the benchmark,
    ``delta = score - benchmark`` and the verdict for that delta."""
    feats = set(scores.features)
    if feats != set(bench) or (classification is not None and feats != set(classification)):
        raise FeatureUniverseMismatch("scores, benchmark and classification cover different features")
    for f, b in bench.items():
        if not (0.0 <= float(b) <= REPORT_SCALE and math.isfinite(float(b))):
            raise ValueError(f"benchmark for {f!r} outside [0, 10]")
    sel = {r.feature: r for r in selection}
    if sel and set(sel) != feats:
        raise FeatureUniverseMismatch("selection covers different features")
    rows = []
    for name, s in scores.rows:
        score = rescale(s)
        b = float(bench[name])
        delta = score - b
        rows.append(
            ReportRow(
                feature=name,
                score=score,
                benchmark=b,
                delta=delta,
                classification=None if classification is None else float(classification[name]),
                verdict=bands.verdict(delta),
                selected=sel[name].selected if sel else None,
                frequency=sel[name].frequency if sel else None,
            )
        )
    rows.sort(key=lambda r: (-r.score, r.feature))
    return UsabilityReport(tuple(rows), dict(meta or {}))
