"""Reference survey counts, scores and a confusion matrix, used as test
fixtures and as the source of the bundled synthetic configuration."""

from __future__ import annotations

from .survey import PolarityTable

FEATURES = (
    "Efficiency",
    "Effectiveness",
    "Ease of use",
    "Learnability",
    "Memorability",
    "Cognition",
    "Consistency",
)

# responses per Likert level 1 (strongly agree) .. 5 (strongly disagree)
POLARITY_COUNTS = {
    "Efficiency": (48, 22, 21, 8, 7),
    "Effectiveness": (38, 26, 18, 6, 9),
    "Ease of use": (39, 28, 18, 8, 7),
    "Learnability": (41, 27, 21, 4, 5),
    "Memorability": (29, 10, 9, 7, 13),
    "Cognition": (12, 9, 7, 5, 13),
    "Consistency": (9, 7, 6, 4, 14),
}

FEATURE_SCORES = {
    "Efficiency": 0.56,
    "Effectiveness": 0.4435,
    "Ease of use": 0.343,
    "Learnability": 0.2134,
    "Memorability": 0.23,
    "Cognition": 0.12,
    "Consistency": 0.34,
}

# 0-10 scale
REPORTED_SCORING = {
    "Efficiency": 8,
    "Effectiveness": 8,
    "Ease of use": 7,
    "Learnability": 6,
    "Memorability": 5,
    "Cognition": 5,
    "Consistency": 4,
}

BENCHMARK = {
    "Efficiency": 8.5,
    "Effectiveness": 7,
    "Ease of use": 8,
    "Learnability": 6.6,
    "Memorability": 7,
    "Cognition": 6,
    "Consistency": 5,
}

CLASSIFICATION_PCT = {
    "Efficiency": 93,
    "Effectiveness": 92,
    "Ease of use": 89,
    "Learnability": 95,
    "Memorability": 93,
    "Cognition": 92,
    "Consistency": 92,
}

# rows = predicted, columns = true
CONFUSION_CLASSES = (
    "Neutral",
    "Highly Recommended",
    "Not Recommended",
    "Highly Not Recommended",
    "Recommended",
    "highly Not Recommended",
)
CONFUSION_COUNTS = (
    (22, 0, 2, 0, 0, 0),
    (0, 6, 0, 0, 0, 0),
    (0, 0, 60, 2, 0, 0),
    (0, 0, 0, 26, 0, 0),
    (0, 0, 0, 0, 28, 0),
    (0, 0, 0, 0, 0, 1),
)


def polarity() -> PolarityTable:
    return PolarityTable.from_dict(POLARITY_COUNTS)
