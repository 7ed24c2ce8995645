import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_lsq_box
from usability_ga import reference
from usability_ga.errors import DimensionMismatch
from usability_ga.scoring import (
    FeatureScoreTable,
    ScoringProblem,
    export_score_table,
    fitness_from_residuals,
    load_score_table,
    score_features,
    total_residual,
)


def test_exact_weights_give_unit_fitness():
    X = np.array([[0.2, 0.4], [0.6, 0.8], [1.0, 0.0]])
    w = np.array([0.5, 0.25])
    p = ScoringProblem(X, X @ w, ("a", "b"))
    fit = total_residual(w, p)
    assert fit.R == 0.0 and fit.F == 1.0


def test_rms_arithmetic():
    fit = fitness_from_residuals([3] + [0] * 8)
    assert fit.R == 1.0 and fit.F == 0.5


def test_random_instance_against_hand_recomputation():
    g = np.random.default_rng(5)
    X = g.uniform(0, 1, (5, 3))
    y = g.uniform(0, 1, 5)
    w = [0.1, 0.7, 0.3]
    p = ScoringProblem(X, y, ("a", "b", "c"))
    # spreadsheet-style: residue per row, square, average, root
    sq = 0.0
    for i in range(5):
        pred = sum(w[d] * X[i, d] for d in range(3))
        sq += (y[i] - pred) ** 2
    R = math.sqrt(sq / 5)
    fit = total_residual(w, p)
    assert fit.R == pytest.approx(R, abs=1e-12)
    assert fit.F == pytest.approx(1 / (1 + R), abs=1e-12)


def test_dimension_mismatch():
    p = ScoringProblem(np.ones((3, 2)), np.ones(3) * 0.5, ("a", "b"))
    with pytest.raises(DimensionMismatch):
        total_residual([0.5], p)


def test_identity_regressor():
    x = np.linspace(0, 1, 21)
    p = ScoringProblem(x[:, None], x, ("only",))
    res = score_features(p, rng=0)
    assert res.table.rows[0][1] == pytest.approx(1.0, abs=0.01)


def test_noise_feature_scores_lower():
    lower = []
    for seed in range(20):
        g = np.random.default_rng(seed)
        x = g.uniform(0, 1, 80)
        noise = g.uniform(0, 1, 80)
        p = ScoringProblem(np.c_[x, noise], x, ("signal", "noise"))
        s = score_features(p, rng=seed).table.as_dict()
        lower.append(s["noise"] < s["signal"])
    assert np.median(lower) == 1


def test_matches_least_squares_optimum():
    g = np.random.default_rng(3)
    X = g.uniform(0, 1, (60, 3))
    y = np.clip(X @ [0.2, 0.5, 0.25] + g.normal(0, 0.02, 60), 0, 1)
    opt = np.linalg.solve(X.T @ X, X.T @ y)  # normal equations
    assert np.all((opt >= 0) & (opt <= 1))
    grid_opt = brute_force_lsq_box(X, y, step=0.01)
    assert np.abs(grid_opt - opt).max() <= 0.01
    w = score_features(ScoringProblem(X, y, ("a", "b", "c")), rng=1).weights
    assert np.abs(w - opt).max() <= 0.05


def test_deterministic_fitness_law_and_baseline_bound():
    g = np.random.default_rng(8)
    X = g.uniform(0, 1, (30, 4))
    y = g.uniform(0, 1, 30)
    p = ScoringProblem(X, y, tuple("abcd"))
    r1 = score_features(p, rng=4)
    r2 = score_features(p, rng=4)
    assert r1.table == r2.table and r1.trace.best == r2.trace.best
    for genes, F in r1.trace.evaluated:
        fit = total_residual(p.weights(genes), p)
        assert F == fit.F == 1 / (1 + fit.R)
    equal = total_residual(np.full(4, 0.25), p).F
    assert r1.fitness.F >= equal


def test_row_permutation_invariance():
    g = np.random.default_rng(9)
    X = g.uniform(0, 1, (25, 3))
    y = g.uniform(0, 1, 25)
    perm = g.permutation(25)
    a = score_features(ScoringProblem(X, y, tuple("abc")), rng=2).table
    b = score_features(ScoringProblem(X[perm], y[perm], tuple("abc")), rng=2).table
    assert a.as_dict() == pytest.approx(b.as_dict())


def test_table_order_and_ties():
    t = FeatureScoreTable.from_mapping({"b": 0.5, "a": 0.5, "c": 0.9})
    assert t.features == ("c", "a", "b")


def test_reference_table_round_trip(tmp_path):
    t = FeatureScoreTable.from_mapping(reference.FEATURE_SCORES)
    p = tmp_path / "scores.csv"
    export_score_table(t, p)
    text = p.read_text()
    assert text.splitlines()[1] == "Efficiency,0.5600"
    assert "Effectiveness,0.4435" in text and "Learnability,0.2134" in text
    p2 = tmp_path / "again.csv"
    export_score_table(load_score_table(p), p2)
    assert p2.read_text() == text


def test_empty_table_header_only(tmp_path):
    p = tmp_path / "e.csv"
    export_score_table(FeatureScoreTable(()), p)
    assert p.read_text() == "feature,score\n"


def test_four_decimals():
    assert FeatureScoreTable.from_mapping({"x": 0.123456}).to_csv().splitlines()[1] == "x,0.1235"


@settings(max_examples=200)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=50))
def test_fitness_law_property(r):
    fit = fitness_from_residuals(r)
    assert fit.F == 1 / (1 + fit.R)
    assert 0 < fit.F <= 1
    if fit.R == 0:
        assert fit.F == 1
    elif fit.R >= 2.3e-16:  # below machine epsilon 1/(1+R) rounds to 1.0
        assert fit.F < 1
