"""Likert survey ingestion, polarity aggregation, encoding, labelling and
synthetic generation.

Responses use the questionnaire's orientation: 1 = strongly agree,
5 = strongly disagree. ``encode`` flips this so larger values mean stronger
agreement.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateRespondentId,
    EmptyBands,
    InconsistentCounts,
    MissingHeader,
    NonMonotoneBands,
    OutOfRangeResponse,
    UnknownQuestionColumn,
)
from .rng import RngSpec, as_rng

LIKERT_LEVELS = (1, 2, 3, 4, 5)
LIKERT_NAMES = ("strongly agree", "agree", "neutral", "disagree", "strongly disagree")

# Fig. 17 class set, best class first. The two "highly not" spellings are kept
# as distinct classes.
DEFAULT_BANDS: tuple[tuple[float, str], ...] = (
    (0.85, "Highly Recommended"),
    (0.70, "Recommended"),
    (0.50, "Neutral"),
    (0.35, "Not Recommended"),
    (0.20, "Highly Not Recommended"),
    (0.0, "highly Not Recommended"),
)


@dataclass(frozen=True)
class QuestionMeta:
    id: str
    feature: str


@dataclass(frozen=True)
class RespondentRecord:
    id: str
    department: str
    responses: Mapping[str, int]


@dataclass(frozen=True)
class SurveyDataset:
    respondents: tuple[RespondentRecord, ...]
    questions: tuple[QuestionMeta, ...]
    features: tuple[str, ...]

    @property
    def feature_map(self) -> dict[str, str]:
        return {q.id: q.feature for q in self.questions}

    def __len__(self) -> int:
        return len(self.respondents)

    def responses(self) -> np.ndarray:
        """N x M integer matrix in question order."""
        qids = [q.id for q in self.questions]
        out = np.empty((len(self.respondents), len(qids)), dtype=np.int64)
        for i, r in enumerate(self.respondents):
            out[i] = [r.responses[q] for q in qids]
        return out

    def to_dict(self) -> dict:
        return {
            "features": list(self.features),
            "questions": [{"id": q.id, "feature": q.feature} for q in self.questions],
            "respondents": [
                {
                    "id": r.id,
                    "department": r.department,
                    "responses": {q.id: int(r.responses[q.id]) for q in self.questions},
                }
                for r in self.respondents
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SurveyDataset":
        questions = tuple(QuestionMeta(q["id"], q["feature"]) for q in d["questions"])
        respondents = tuple(
            RespondentRecord(r["id"], r["department"], dict(r["responses"]))
            for r in d["respondents"]
        )
        ds = cls(respondents, questions, tuple(d["features"]))
        _validate(ds)
        return ds

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self, path: str | Path) -> None:
        qids = [q.id for q in self.questions]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "department", *qids])
            for r in self.respondents:
                w.writerow([r.id, r.department, *(r.responses[q] for q in qids)])


@dataclass(frozen=True)
class PolarityTable:
    features: tuple[str, ...]
    counts: np.ndarray  # F x 5, column k = Likert level k+1

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64).reshape(len(self.features), 5)
        if (counts < 0).any():
            raise InconsistentCounts("polarity counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "counts", counts)

    def row(self, feature: str) -> tuple[int, ...]:
        return tuple(int(v) for v in self.counts[self.features.index(feature)])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolarityTable):
            return NotImplemented
        return self.features == other.features and np.array_equal(self.counts, other.counts)

    def to_dict(self) -> dict:
        return {f: [int(v) for v in row] for f, row in zip(self.features, self.counts)}

    @classmethod
    def from_dict(cls, d: Mapping[str, Sequence[int]]) -> "PolarityTable":
        feats = tuple(d)
        return cls(feats, np.array([list(d[f]) for f in feats], dtype=np.int64))

    def to_json(self) -> str:
        # feature order is meaningful, so keys are emitted as an ordered list
        return json.dumps(
            {"levels": list(LIKERT_LEVELS), "rows": [[f, r] for f, r in self.to_dict().items()]},
            indent=2,
        )


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    feature_names: tuple[str, ...]
    labels: np.ndarray | None = None
    class_names: tuple[str, ...] = ()
    ids: tuple[str, ...] = field(default=())

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("FeatureMatrix needs N >= 1 rows and D >= 1 columns")
        if v.shape[1] != len(self.feature_names):
            raise ValueError("feature_names length does not match column count")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=np.int64)
            if lab.shape != (v.shape[0],):
                raise ValueError("labels must have one entry per row")
            if len(lab) and (lab.min() < 0 or lab.max() >= len(self.class_names)):
                raise ValueError("label id out of range of class_names")
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def rows(self, idx: Sequence[int] | np.ndarray) -> "FeatureMatrix":
        idx = np.asarray(idx, dtype=np.int64)
        return replace(
            self,
            values=self.values[idx],
            labels=None if self.labels is None else self.labels[idx],
            ids=tuple(self.ids[i] for i in idx) if self.ids else (),
        )

    def columns(self, mask: Sequence[bool] | np.ndarray) -> "FeatureMatrix":
        mask = np.asarray(mask, dtype=bool)
        return replace(
            self,
            values=self.values[:, mask],
            feature_names=tuple(f for f, m in zip(self.feature_names, mask) if m),
        )


# ---------------------------------------------------------------------------
# loading


def _validate(ds: SurveyDataset) -> None:
    seen: set[str] = set()
    qids = [q.id for q in ds.questions]
    for q in ds.questions:
        if q.feature not in ds.features:
            raise UnknownQuestionColumn(f"question {q.id!r} maps to unknown feature {q.feature!r}")
    for row, r in enumerate(ds.respondents, start=1):
        if r.id in seen:
            raise DuplicateRespondentId(r.id)
        seen.add(r.id)
        for q in qids:
            v = r.responses.get(q)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 1 <= v <= 5:
                raise OutOfRangeResponse(row, q, v)


def _feature_order(schema: Mapping[str, str], features: Iterable[str] | None) -> tuple[str, ...]:
    if features is not None:
        return tuple(features)
    return tuple(dict.fromkeys(schema.values()))


def load_survey(
    path: str | Path,
    schema: Mapping[str, str],
    features: Sequence[str] | None = None,
) -> SurveyDataset:
    """Read a survey CSV (``id,department,q1..qM``).

    ``schema`` maps question id to usability feature. Invalid rows abort the
    load; rows are numbered from 1 (the first data row).
    """
    feats = _feature_order(schema, features)
    for q, f in schema.items():
        if f not in feats:
            raise UnknownQuestionColumn(f"question {q!r} maps to unconfigured feature {f!r}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or not any(h.strip() for h in header):
            raise MissingHeader(f"{path}: no header row")
        header = [h.strip() for h in header]
        if header[:2] != ["id", "department"]:
            raise MissingHeader(f"{path}: header must start with 'id,department'")
        qcols = header[2:]
        for q in qcols:
            if q not in schema:
                raise UnknownQuestionColumn(q)
        missing = [q for q in schema if q not in qcols]
        if missing:
            raise MissingHeader(f"{path}: header lacks question columns {missing}")

        respondents = []
        seen: set[str] = set()
        for row_no, cells in enumerate(reader, start=1):
            if not cells or all(not c.strip() for c in cells):
                continue
            if len(cells) != len(header):
                col = header[len(cells)] if len(cells) < len(header) else "<extra>"
                raise OutOfRangeResponse(row_no, col, None)
            rid, dept = cells[0].strip(), cells[1].strip()
            if rid in seen:
                raise DuplicateRespondentId(rid)
            seen.add(rid)
            responses = {}
            for q, raw in zip(qcols, cells[2:]):
                raw = raw.strip()
                try:
                    v = int(raw)
                except ValueError:
                    raise OutOfRangeResponse(row_no, q, raw) from None
                if not 1 <= v <= 5:
                    raise OutOfRangeResponse(row_no, q, v)
                responses[q] = v
            respondents.append(RespondentRecord(rid, dept, responses))

    # question order follows the header
    questions = tuple(QuestionMeta(q, schema[q]) for q in qcols)
    return SurveyDataset(tuple(respondents), questions, feats)


def department_counts(ds: SurveyDataset) -> dict[str, int]:
    return dict(sorted(Counter(r.department for r in ds.respondents).items()))


# ---------------------------------------------------------------------------
# aggregation / encoding / labelling


def polarity_table(ds: SurveyDataset) -> PolarityTable:
    counts = np.zeros((len(ds.features), 5), dtype=np.int64)
    fidx = {f: i for i, f in enumerate(ds.features)}
    for q in ds.questions:
        row = counts[fidx[q.feature]]
        for r in ds.respondents:
            row[r.responses[q.id] - 1] += 1
    return PolarityTable(ds.features, counts)


def encode_response(r: int | np.ndarray) -> float | np.ndarray:
    return (5 - np.asarray(r, dtype=float)) / 4.0


def encode(ds: SurveyDataset) -> FeatureMatrix:
    """Per respondent and feature, the mean of ``(5 - r) / 4`` over the
    feature's questions. Features with no questions encode as 0.5 (neutral)."""
    resp = encode_response(ds.responses()) if ds.respondents else np.zeros((0, len(ds.questions)))
    values = np.full((len(ds.respondents), len(ds.features)), 0.5)
    for j, f in enumerate(ds.features):
        cols = [k for k, q in enumerate(ds.questions) if q.feature == f]
        if cols:
            values[:, j] = resp[:, cols].mean(axis=1)
    return FeatureMatrix(values, ds.features, ids=tuple(r.id for r in ds.respondents))


def check_bands(bands: Sequence[tuple[float, str]]) -> None:
    if not bands:
        raise EmptyBands("at least one band is required")
    ths = [float(t) for t, _ in bands]
    if any(not 0.0 <= t <= 1.0 for t in ths):
        raise NonMonotoneBands("band thresholds must lie in [0, 1]")
    if any(b >= a for a, b in zip(ths, ths[1:])):
        raise NonMonotoneBands("band thresholds must be strictly decreasing")


def auto_label(
    fm: FeatureMatrix, bands: Sequence[tuple[float, str]] = DEFAULT_BANDS
) -> FeatureMatrix:
    """Label each row by the first band whose threshold is <= the row mean.

    Class ids follow band order, so id 0 is the best class. A row whose mean
    falls below every threshold takes the last band.
    """
    check_bands(bands)
    ths = np.array([float(t) for t, _ in bands])
    means = fm.values.mean(axis=1)
    hit = means[:, None] >= ths[None, :]
    labels = np.where(hit.any(axis=1), hit.argmax(axis=1), len(bands) - 1)
    return replace(fm, labels=labels, class_names=tuple(name for _, name in bands))


def class_targets(fm: FeatureMatrix) -> np.ndarray:
    """Map class ids linearly onto [0, 1] with the best class (id 0) at 1."""
    k = len(fm.class_names)
    if fm.labels is None:
        raise ValueError("feature matrix has no labels")
    if k <= 1:
        return np.ones(fm.n)
    return 1.0 - fm.labels / (k - 1)


# ---------------------------------------------------------------------------
# synthetic generation


def largest_remainder(counts: Sequence[int], n: int) -> np.ndarray:
    """Rescale ``counts`` to sum to ``n``; leftover units go to the largest
    fractional parts, lower Likert level first on ties."""
    counts = np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    if total == n:
        return counts.copy()
    if total == 0:
        raise InconsistentCounts("cannot rescale an all-zero row to a positive count")
    exact = counts * n / total
    base = np.floor(exact).astype(np.int64)
    rem = n - int(base.sum())
    frac = exact - base
    order = sorted(range(len(counts)), key=lambda k: (-frac[k], k))
    for k in order[:rem]:
        base[k] += 1
    return base


_DEPARTMENTS = ("Computer Science", "Education", "Management Sciences", "Mathematics", "Physics")


def generate_synthetic(
    pt: PolarityTable,
    n: int,
    mode: str = "exact",
    rng: RngSpec | int | None = None,
) -> SurveyDataset:
    """Build a survey with one question per feature from polarity counts.

    ``exact`` mode fixes each feature's histogram (rescaled to ``n`` by largest
    remainder when its row does not already sum to ``n``) and shuffles which
    respondent gets which response. ``sampled`` mode draws every response from
    the feature's empirical distribution.
    """
    if n < 1:
        raise InconsistentCounts("n must be positive")
    if mode not in ("exact", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = as_rng(rng)
    levels = np.array(LIKERT_LEVELS)
    columns = []
    for j, f in enumerate(pt.features):
        row = pt.counts[j]
        g = rng.numpy("synthetic", mode, j)
        if mode == "exact":
            counts = largest_remainder(row, n)
            col = np.repeat(levels, counts)
            col = col[g.permutation(n)]
        else:
            total = row.sum()
            if total == 0:
                raise InconsistentCounts(f"feature {f!r} has no responses to sample from")
            col = g.choice(levels, size=n, p=row / total)
        columns.append(col)
    depts = rng.numpy("synthetic", "departments").integers(0, len(_DEPARTMENTS), size=n)

    width = len(str(n))
    questions = tuple(QuestionMeta(f"q{j + 1}", f) for j, f in enumerate(pt.features))
    respondents = tuple(
        RespondentRecord(
            f"r{i + 1:0{width}d}",
            _DEPARTMENTS[depts[i]],
            {q.id: int(columns[j][i]) for j, q in enumerate(questions)},
        )
        for i in range(n)
    )
    return SurveyDataset(respondents, questions, pt.features)
