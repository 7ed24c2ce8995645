"""Support vector machines trained with simplified SMO.

Inputs are expected on a common scale (the survey encoder yields [0, 1]);
nothing is standardised internally.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyGrid,
    InvalidRange,
    NonFiniteFeature,
    SingleClassInput,
)
from .evaluation import kfold_indices
from .rng import RngSpec, as_rng

log = logging.getLogger(__name__)

_MAX_SWEEPS = 20_000


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: float | None = None  # rbf only; None -> 1 / n_features at fit time

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.gamma is not None and not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError("gamma must be finite and positive")

    def resolved(self, n_features: int) -> "KernelSpec":
        if self.kind == "rbf" and self.gamma is None:
            return KernelSpec("rbf", 1.0 / max(n_features, 1))
        return self


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    kernel: KernelSpec = field(default_factory=KernelSpec)
    tol: float = 1e-3
    max_passes: int = 100

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


def kernel_matrix(k: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"{A.shape[1]} != {B.shape[1]}")
    if k.kind == "linear":
        return A @ B.T
    k = k.resolved(A.shape[1])
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * (A @ B.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-k.gamma * sq)


def kernel_eval(k: KernelSpec, x: Sequence[float], z: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape:
        raise DimensionMismatch(f"{x.shape} != {z.shape}")
    if k.kind == "linear":
        return float(x @ z)
    k = k.resolved(x.size)
    d = x - z
    return float(np.exp(-k.gamma * (d @ d)))


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i
    bias: float
    kernel: KernelSpec
    C: float
    support_index: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))

    @property
    def alphas(self) -> np.ndarray:
        return np.abs(self.dual_coef)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.support_vectors.shape[1]:
            raise DimensionMismatch(f"{X.shape[1]} != {self.support_vectors.shape[1]}")
        out = kernel_matrix(self.kernel, X, self.support_vectors) @ self.dual_coef + self.bias
        return float(out[0]) if single else out

    def negated(self) -> "SvmModel":
        return replace(self, dual_coef=-self.dual_coef, bias=-self.bias)

    def to_dict(self) -> dict:
        return {
            "kernel": {"kind": self.kernel.kind, "gamma": self.kernel.gamma},
            "C": self.C,
            "bias": self.bias,
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "support_index": self.support_index.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        return cls(
            support_vectors=np.asarray(d["support_vectors"], dtype=float),
            dual_coef=np.asarray(d["dual_coef"], dtype=float),
            bias=float(d["bias"]),
            kernel=KernelSpec(d["kernel"]["kind"], d["kernel"]["gamma"]),
            C=float(d["C"]),
            support_index=np.asarray(d.get("support_index", []), dtype=np.int64),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def decision_function(m: SvmModel, x: np.ndarray) -> float | np.ndarray:
    return m.decision_function(x)


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def _check_finite(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch("X must be 2-D")
    if not np.isfinite(X).all():
        raise NonFiniteFeature("X contains NaN or infinite values")
    return X


def smo(
    K: np.ndarray, y: np.ndarray, C: float, tol: float, max_passes: int, rng: RngSpec
) -> tuple[np.ndarray, float]:
    """Simplified SMO on a precomputed kernel matrix; returns (alpha, bias).

    Each sweep visits the current KKT violators in index order and pairs each
    with a partner drawn from the seeded stream, falling back to a scan of
    the other indices when that partner cannot make progress. A sweep with no
    violators ends training immediately, since further sweeps could not
    change anything.
    """
    n = len(y)
    r = rng.py("smo")
    yl = [float(v) for v in y]
    diag = np.diag(K).tolist()
    alpha = [0.0] * n
    b = 0.0
    E = -np.asarray(y, dtype=float)  # f(x_i) - y_i with alpha = 0, b = 0

    def take_step(i, j, Ei):
        nonlocal b
        Ej = float(E[j])
        yi, yj = yl[i], yl[j]
        ai, aj = alpha[i], alpha[j]
        if yi != yj:
            L, H = max(0.0, aj - ai), min(C, C + aj - ai)
        else:
            L, H = max(0.0, ai + aj - C), min(C, ai + aj)
        if L >= H:
            return False
        Kij = float(K[i, j])
        eta = 2.0 * Kij - diag[i] - diag[j]
        if eta >= 0:
            return False
        aj_new = min(H, max(L, aj - yj * (Ei - Ej) / eta))
        if abs(aj_new - aj) < 1e-5 * (aj_new + aj + 1e-5):
            return False
        ai_new = min(C, max(0.0, ai + yi * yj * (aj - aj_new)))
        # snap round-off onto the box
        if ai_new < 1e-12 * C:
            ai_new = 0.0
        elif ai_new > C * (1 - 1e-12):
            ai_new = C
        if aj_new < 1e-12 * C:
            aj_new = 0.0
        elif aj_new > C * (1 - 1e-12):
            aj_new = C
        di = yi * (ai_new - ai)
        dj = yj * (aj_new - aj)
        b1 = b - Ei - di * diag[i] - dj * Kij
        b2 = b - Ej - di * Kij - dj * diag[j]
        if 0 < ai_new < C:
            b_new = b1
        elif 0 < aj_new < C:
            b_new = b2
        else:
            b_new = (b1 + b2) / 2.0
        E[:] += di * K[i] + dj * K[j] + (b_new - b)
        alpha[i], alpha[j], b = ai_new, aj_new, b_new
        return True

    passes = sweeps = 0
    while passes < max_passes:
        sweeps += 1
        if sweeps > _MAX_SWEEPS:
            log.warning("SMO stopped after %d sweeps without converging", _MAX_SWEEPS)
            break
        a = np.asarray(alpha)
        yE = y * E
        viol = np.flatnonzero(((yE < -tol) & (a < C)) | ((yE > tol) & (a > 0)))
        if viol.size == 0:
            break
        changed = 0
        for i in viol.tolist():
            Ei = float(E[i])
            yEi = yl[i] * Ei
            if not ((yEi < -tol and alpha[i] < C) or (yEi > tol and alpha[i] > 0)):
                continue
            j = r.randrange(n - 1)
            if j >= i:
                j += 1
            if take_step(i, j, Ei):
                changed += 1
                continue
            # the random partner could not move; scan the rest from j on
            for k in range(1, n - 1):
                jj = (j + k) % n
                if jj != i and take_step(i, jj, Ei):
                    changed += 1
                    break
        passes = passes + 1 if changed == 0 else 0
    return np.asarray(alpha), b


def train_binary(
    X: np.ndarray,
    y: Sequence[int],
    cfg: SvmConfig = SvmConfig(),
    rng: RngSpec | int | None = None,
) -> SvmModel:
    X = _check_finite(X)
    y = np.asarray(y, dtype=float)
    if len(y) != X.shape[0]:
        raise DimensionMismatch("X and y lengths differ")
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ValueError("binary labels must be -1 or +1")
    if len(y) < 2 or len(np.unique(y)) < 2:
        raise SingleClassInput("both classes must be present")
    kernel = cfg.kernel.resolved(X.shape[1])
    K = kernel_matrix(kernel, X, X)
    alpha, b = smo(K, y, cfg.C, cfg.tol, cfg.max_passes, as_rng(rng))
    sv = np.flatnonzero(alpha > 0)
    return SvmModel(X[sv].copy(), alpha[sv] * y[sv], float(b), kernel, cfg.C, sv)


def kkt_violations(model: SvmModel, X: np.ndarray, y: Sequence[int], tol: float) -> np.ndarray:
    """Indices of training points violating the KKT conditions beyond ``tol``."""
    y = np.asarray(y, dtype=float)
    alpha = np.zeros(len(y))
    alpha[model.support_index] = model.alphas
    m = y * model.decision_function(np.asarray(X, dtype=float))
    C = model.C
    bad = (
        ((alpha == 0) & (m < 1 - tol))
        | ((alpha > 0) & (alpha < C) & (np.abs(m - 1) > tol))
        | ((alpha == C) & (m > 1 + tol))
    )
    return np.flatnonzero(bad)


# ---------------------------------------------------------------------------
# multiclass


@dataclass(frozen=True)
class MulticlassSvm:
    """One-vs-rest ensemble. ``classes`` are the class ids seen in training;
    ``n_classes`` is the size of the full label space."""

    models: tuple[SvmModel, ...]
    classes: tuple[int, ...]
    n_classes: int
    class_names: tuple[str, ...] = ()

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.full((X.shape[0], self.n_classes), -np.inf)
        for c, m in zip(self.classes, self.models):
            out[:, c] = m.decision_function(X)
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        # argmax returns the first maximum, i.e. the lowest class id on ties
        return np.argmax(self.decision_scores(X), axis=1)


def train_multiclass(
    X: np.ndarray,
    labels: Sequence[int],
    cfg: SvmConfig = SvmConfig(),
    rng: RngSpec | int | None = None,
    n_classes: int | None = None,
    class_names: Sequence[str] = (),
) -> MulticlassSvm:
    X = _check_finite(X)
    labels = np.asarray(labels, dtype=np.int64)
    classes = tuple(int(c) for c in np.unique(labels))
    if len(classes) < 2:
        raise SingleClassInput("need at least two classes")
    n_classes = max(classes) + 1 if n_classes is None else n_classes
    rng = as_rng(rng)
    if len(classes) == 2:
        # the two one-vs-rest problems are mirror images of each other
        hi = train_binary(X, np.where(labels == classes[1], 1, -1), cfg, rng.child("ovr", classes[1]))
        models = (hi.negated(), hi)
    else:
        models = tuple(
            train_binary(X, np.where(labels == c, 1, -1), cfg, rng.child("ovr", c)) for c in classes
        )
    return MulticlassSvm(models, classes, n_classes, tuple(class_names))


def predict(m: MulticlassSvm, x: np.ndarray) -> int | np.ndarray:
    x = np.asarray(x, dtype=float)
    out = m.predict(x)
    return int(out[0]) if x.ndim == 1 else out


@dataclass(frozen=True)
class SvmSpec:
    """Model spec for cross-validation: an SVM config plus an optional column
    mask (the GA-selected features)."""

    config: SvmConfig = field(default_factory=SvmConfig)
    mask: tuple[bool, ...] | None = None
    name: str = "ga_svm"

    def _cols(self, X: np.ndarray) -> np.ndarray:
        return X if self.mask is None else X[:, np.asarray(self.mask, dtype=bool)]

    def fit(self, X, labels, rng, n_classes):
        model = train_multiclass(self._cols(np.asarray(X, float)), labels, self.config, rng, n_classes)
        return _MaskedSvm(model, self)


@dataclass(frozen=True)
class _MaskedSvm:
    model: MulticlassSvm
    spec: SvmSpec

    def predict(self, X):
        return self.model.predict(self.spec._cols(np.asarray(X, float)))

    def decision_scores(self, X):
        return self.model.decision_scores(self.spec._cols(np.asarray(X, float)))


# ---------------------------------------------------------------------------
# hyperparameter search


def cv_accuracy(
    X: np.ndarray,
    labels: np.ndarray,
    cfg: SvmConfig,
    parts: list[tuple[np.ndarray, np.ndarray]],
    rng: RngSpec,
    n_classes: int | None = None,
) -> float:
    """Pooled accuracy over the test folds of ``parts``."""
    labels = np.asarray(labels)
    n_classes = int(labels.max()) + 1 if n_classes is None else n_classes
    correct = total = 0
    for f, (tr, te) in enumerate(parts):
        ytr = labels[tr]
        if len(np.unique(ytr)) < 2:
            # degenerate fold: the only option is the single training class
            pred = np.full(len(te), ytr[0])
        else:
            pred = train_multiclass(X[tr], ytr, cfg, rng.child("fold", f), n_classes).predict(X[te])
        correct += int((pred == labels[te]).sum())
        total += len(te)
    return correct / total


@dataclass(frozen=True)
class SearchResult:
    best: SvmConfig
    best_accuracy: float
    table: tuple[dict, ...]

    def to_csv(self) -> str:
        lines = ["C,gamma,cv_accuracy"]
        for row in self.table:
            lines.append(f"{row['C']!r},{row['gamma']!r},{row['cv_accuracy']!r}")
        return "\n".join(lines) + "\n"


def _search(
    X, labels, candidates, folds, rng, base: SvmConfig
) -> SearchResult:
    X = _check_finite(X)
    labels = np.asarray(labels, dtype=np.int64)
    rng = as_rng(rng)
    parts = kfold_indices(len(labels), folds, rng.child("cv"), labels)
    table = []
    best = None
    for C, gamma in candidates:
        kernel = KernelSpec("linear") if base.kernel.kind == "linear" else KernelSpec("rbf", gamma)
        cfg = replace(base, C=C, kernel=kernel)
        acc = cv_accuracy(X, labels, cfg, parts, rng.child("train"))
        table.append({"C": C, "gamma": gamma, "cv_accuracy": acc})
        key = (acc, -C, -(gamma or 0.0))
        if best is None or key > best[0]:
            best = (key, cfg, acc)
    return SearchResult(best[1], best[2], tuple(table))


def grid_search(
    X: np.ndarray,
    labels: Sequence[int],
    C_grid: Sequence[float],
    gamma_grid: Sequence[float],
    folds: int = 5,
    rng: RngSpec | int | None = None,
    base: SvmConfig = SvmConfig(),
) -> SearchResult:
    """Exhaustive CV over ``C_grid x gamma_grid``; ties go to the smaller C,
    then the smaller gamma. Duplicate grid entries are ignored."""
    if not len(C_grid) or (base.kernel.kind == "rbf" and not len(gamma_grid)):
        raise EmptyGrid("grids must be non-empty")
    if folds < 2:
        raise ValueError("folds must be >= 2")
    Cs = sorted({float(c) for c in C_grid})
    gammas = sorted({float(g) for g in gamma_grid}) if base.kernel.kind == "rbf" else [None]
    return _search(X, labels, [(c, g) for c in Cs for g in gammas], folds, rng, base)


def random_search(
    X: np.ndarray,
    labels: Sequence[int],
    C_range: tuple[float, float],
    gamma_range: tuple[float, float],
    n_draws: int = 20,
    folds: int = 5,
    rng: RngSpec | int | None = None,
    base: SvmConfig = SvmConfig(),
) -> SearchResult:
    """CV over ``n_draws`` configurations drawn log-uniformly from the ranges."""
    if n_draws < 1:
        raise InvalidRange("n_draws must be >= 1")
    for lo, hi in (C_range, gamma_range):
        if not (0 < lo <= hi and math.isfinite(hi)):
            raise InvalidRange(f"bad range ({lo}, {hi})")
    rng = as_rng(rng)
    g = rng.numpy("random_search")

    def draw(lo, hi):
        return float(lo) if lo == hi else float(np.exp(g.uniform(np.log(lo), np.log(hi))))

    candidates = []
    for _ in range(n_draws):
        c = draw(*C_range)
        gm = draw(*gamma_range)
        candidates.append((c, gm if base.kernel.kind == "rbf" else None))
    return _search(X, labels, candidates, folds, rng, base)
