"""Config-driven orchestration of the full assessment.

Stages run lazily and are cached, so a CLI subcommand only computes what its
outputs need. Every failure is re-raised as ``StageError`` naming the stage.
"""

from __future__ import annotations

import hashlib
import json
import platform
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np

from . import __version__, reference
from .baselines import BaselineSpec, ComparisonTable, compare_models
from .errors import DataError
from .evaluation import PipelineEvaluation, evaluate_pipeline, metrics_json
from .ga import GaConfig
from .report import UsabilityReport, VerdictBands, build_report
from .rng import RngSpec
from .scoring import DEFAULT_SCORING_GA, ScoringProblem, ScoringResult, score_features
from .selection import DEFAULT_SELECTION_GA, MaskEvaluator, SelectionResult, select_features, selection_report
from .survey import (
    DEFAULT_BANDS,
    FeatureMatrix,
    PolarityTable,
    SurveyDataset,
    auto_label,
    department_counts,
    encode,
    generate_synthetic,
    load_survey,
    polarity_table,
)
from .svm import KernelSpec, SearchResult, SvmConfig, SvmSpec, grid_search, random_search


class ConfigError(ValueError):
    """The run configuration is invalid (CLI usage error)."""


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")

    @property
    def is_data_error(self) -> bool:
        return isinstance(self.cause, (DataError, FileNotFoundError, IsADirectoryError, PermissionError))


def bundled_config_path() -> Path:
    return Path(str(resources.files("usability_ga") / "data" / "synthetic.json"))


def load_config(path: str | Path | None) -> dict:
    p = bundled_config_path() if path is None else Path(path)
    try:
        cfg = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if "dataset" not in cfg:
        raise ConfigError("config needs a 'dataset' section")
    cfg.setdefault("_base_dir", str(p.parent.resolve()))
    return cfg


def _ga(section: Mapping | None, default: GaConfig) -> GaConfig:
    try:
        return replace(default, **dict(section or {}))
    except TypeError as e:
        raise ConfigError(f"bad GA settings: {e}") from None


def _svm(section: Mapping | None) -> SvmConfig:
    s = dict(section or {})
    kernel = KernelSpec(s.pop("kernel", "rbf"), s.pop("gamma", None))
    try:
        return SvmConfig(kernel=kernel, **s)
    except TypeError as e:
        raise ConfigError(f"bad svm settings: {e}") from None


def _digest(obj: Any) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


class Pipeline:
    def __init__(self, config: Mapping, seed: int | None = None):
        self.config = {k: v for k, v in config.items() if not k.startswith("_")}
        self.base_dir = Path(config.get("_base_dir", "."))
        self.seed = int(seed if seed is not None else config.get("seed", 0))
        self.rng = RngSpec(self.seed)
        self.folds = int(self.config.get("folds", 10))
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        self.svm_base = _svm(self.config.get("svm"))
        self.bands = VerdictBands(
            tuple(tuple(b) for b in self.config.get("verdict_bands", {}).get("bands", VerdictBands().bands)),
            self.config.get("verdict_bands", {}).get("floor", "Poor"),
        )

    def _stage(self, name: str, fn: Callable):
        try:
            return fn()
        except StageError:
            raise
        except Exception as e:  # noqa: BLE001 - re-tagged with the stage name
            raise StageError(name, e) from e

    # -- ingest -----------------------------------------------------------

    @cached_property
    def polarity_source(self) -> PolarityTable | None:
        syn = self.config["dataset"].get("synthetic")
        if syn is None:
            return None
        pol = syn.get("polarity", "reference")
        return reference.polarity() if pol == "reference" else PolarityTable.from_dict(pol)

    @cached_property
    def dataset(self) -> SurveyDataset:
        def run():
            ds_cfg = self.config["dataset"]
            if "synthetic" in ds_cfg:
                syn = ds_cfg["synthetic"]
                return generate_synthetic(
                    self.polarity_source, int(syn.get("n", 106)), syn.get("mode", "exact"), self.rng.child("synth")
                )
            if "path" not in ds_cfg:
                raise ConfigError("dataset needs 'path' or 'synthetic'")
            path = Path(ds_cfg["path"])
            if not path.is_absolute():
                path = self.base_dir / path
            schema = ds_cfg.get("schema")
            if not schema:
                raise ConfigError("dataset.schema (question id -> feature) is required for CSV input")
            return load_survey(path, schema, ds_cfg.get("features"))

        return self._stage("ingest", run)

    @cached_property
    def polarity(self) -> PolarityTable:
        return self._stage("ingest", lambda: polarity_table(self.dataset))

    @cached_property
    def matrix(self) -> FeatureMatrix:
        def run():
            bands = self.config.get("labels", {}).get("bands", DEFAULT_BANDS)
            return auto_label(encode(self.dataset), [tuple(b) for b in bands])

        return self._stage("label", run)

    # -- modelling --------------------------------------------------------

    @cached_property
    def scoring(self) -> ScoringResult:
        def run():
            sc = self.config.get("scoring", {})
            problem = ScoringProblem.from_matrix(self.matrix, sc.get("weight_resolution", 0.01))
            return score_features(problem, _ga(sc.get("ga"), DEFAULT_SCORING_GA), self.rng.child("score"))

        return self._stage("score", run)

    @cached_property
    def tuning(self) -> SearchResult:
        def run():
            t = self.config.get("tuning", {})
            fm = self.matrix
            folds = int(t.get("folds", 5))
            method = t.get("method", "grid")
            if method == "grid":
                return grid_search(
                    fm.values, fm.labels, t.get("C_grid", [0.1, 1, 10]), t.get("gamma_grid", [0.1, 1, 10]),
                    folds, self.rng.child("tune"), self.svm_base,
                )
            if method == "random":
                return random_search(
                    fm.values, fm.labels, tuple(t.get("C_range", (0.1, 100))), tuple(t.get("gamma_range", (0.01, 10))),
                    int(t.get("n_draws", 20)), folds, self.rng.child("tune"), self.svm_base,
                )
            raise ConfigError(f"unknown tuning method {method!r}")

        return self._stage("tune", run)

    @cached_property
    def mask_evaluator(self) -> MaskEvaluator:
        sel = self.config.get("selection", {})
        return MaskEvaluator(
            self.matrix, self.tuning.best, int(sel.get("folds", 5)), self.rng.child("select"),
            float(sel.get("penalty", 0.0)),
        )

    @cached_property
    def selection(self) -> SelectionResult:
        def run():
            sel = self.config.get("selection", {})
            return select_features(
                self.matrix, self.tuning.best, _ga(sel.get("ga"), DEFAULT_SELECTION_GA),
                rng=self.rng.child("select"), evaluator=self.mask_evaluator,
            )

        return self._stage("select", run)

    @cached_property
    def ga_svm(self) -> SvmSpec:
        return SvmSpec(self.tuning.best, tuple(bool(b) for b in self.selection.best_mask), "ga_svm")

    @cached_property
    def evaluation(self) -> PipelineEvaluation:
        return self._stage(
            "evaluate", lambda: evaluate_pipeline(self.matrix, self.ga_svm, self.folds, self.rng.child("evaluate"))
        )

    @cached_property
    def comparison(self) -> ComparisonTable:
        def run():
            specs = [self.ga_svm] + [
                BaselineSpec(b["kind"], b.get("params", {}), b.get("name", "")) for b in self.config.get(
                    "baselines", [{"kind": k} for k in ("knn", "gaussian_nb", "tree", "forest", "logreg")]
                )
            ]
            return compare_models(specs, self.matrix, self.folds, self.rng.child("compare"))

        return self._stage("compare", run)

    @cached_property
    def report(self) -> UsabilityReport:
        def run():
            fm = self.matrix
            d = fm.d
            # per-feature accuracy: CV accuracy of the tuned SVM on that feature alone
            classification = {
                f: round(100.0 * self.mask_evaluator.accuracy([int(k == j) for k in range(d)]), 10)
                for j, f in enumerate(fm.feature_names)
            }
            bench = self.config.get("benchmark", reference.BENCHMARK)
            rows = selection_report(self.selection, self.scoring.table)
            return build_report(self.scoring.table, bench, classification, self.bands, rows, self.manifest)

        return self._stage("report", run)

    @cached_property
    def manifest(self) -> dict:
        return {
            "seed": self.seed,
            "config_sha256": _digest(self.config),
            "dataset_sha256": _digest(self.dataset.to_dict()),
            "respondents": len(self.dataset),
            "folds": self.folds,
            "versions": {
                "usability_ga": __version__,
                "numpy": np.__version__,
                "python": ".".join(platform.python_version_tuple()[:2]),
            },
        }

    # -- outputs ----------------------------------------------------------

    def outputs(self, command: str) -> dict[str, Callable[[], str]]:
        """File name -> content producer for each subcommand."""
        ingest = {
            "dataset.json": lambda: self.dataset.to_json() + "\n",
            "polarity.json": lambda: self.polarity.to_json() + "\n",
            "departments.json": lambda: json.dumps(department_counts(self.dataset), indent=2) + "\n",
        }
        score = {
            "scores.csv": lambda: self.scoring.table.to_csv(),
            "scores.json": lambda: self.scoring.table.to_json() + "\n",
            "score_trace.csv": lambda: self.scoring.trace.to_csv(),
        }
        tune = {
            "tuning.csv": lambda: self.tuning.to_csv(),
            "tuning.json": lambda: json.dumps(
                {"C": self.tuning.best.C, "gamma": self.tuning.best.kernel.gamma,
                 "kernel": self.tuning.best.kernel.kind, "cv_accuracy": self.tuning.best_accuracy},
                indent=2, sort_keys=True) + "\n",
        }
        select = {
            "selection.json": lambda: self.selection.to_json() + "\n",
            "trace.csv": lambda: self.selection.trace.to_csv(),
        }
        evaluate = {
            "confusion.csv": lambda: self.evaluation.confusion.to_csv(),
            "metrics.json": lambda: metrics_json(self.evaluation) + "\n",
        }
        compare = {
            "comparison.csv": lambda: self.comparison.to_csv(),
            "comparison.json": lambda: self.comparison.to_json() + "\n",
        }
        report = {
            "report.json": lambda: self.report.to_json() + "\n",
            "report.csv": lambda: self.report.to_csv(),
            "manifest.json": lambda: json.dumps(self.manifest, indent=2, sort_keys=True) + "\n",
        }
        synth = {"survey.csv": None, **ingest}
        table = {
            "ingest": ingest,
            "synth": synth,
            "score": score,
            "tune": tune,
            "select": select,
            "evaluate": evaluate,
            "compare": compare,
            "report": report,
            "run": {**ingest, **score, **tune, **select, **evaluate, **compare, **report},
        }
        return table[command]

    def write(self, command: str, out: str | Path) -> list[Path]:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, produce in self.outputs(command).items():
            path = out / name
            if produce is None:  # survey.csv
                self.dataset.to_csv(path)
            else:
                path.write_text(produce(), encoding="utf-8")
            written.append(path)
        return written


def run_pipeline(config: Mapping | str | Path | None, out: str | Path, seed: int | None = None) -> UsabilityReport:
    cfg = config if isinstance(config, Mapping) else load_config(config)
    p = Pipeline(cfg, seed)
    p.write("run", out)
    return p.report
