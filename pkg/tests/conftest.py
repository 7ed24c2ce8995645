import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from usability_ga.survey import FeatureMatrix  # noqa: E402


@pytest.fixture
def write_csv(tmp_path):
    def _write(text, name="survey.csv"):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p

    return _write


@pytest.fixture
def separable_binary():
    g = np.random.default_rng(0)
    X = g.uniform(0, 1, (80, 3))
    y = (X[:, 0] > 0.5).astype(int)
    return FeatureMatrix(X, ("a", "b", "c"), y, ("low", "high"))


@pytest.fixture
def three_clusters():
    g = np.random.default_rng(1)
    centers = np.array([[0.15, 0.15], [0.85, 0.2], [0.5, 0.85]])
    X = np.concatenate([c + g.normal(0, 0.05, (30, 2)) for c in centers])
    y = np.repeat([0, 1, 2], 30)
    return FeatureMatrix(X, ("x", "y"), y, ("c0", "c1", "c2"))


ACCEPTANCE_RESULTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[n])
