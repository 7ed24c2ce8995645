"""Exception hierarchy.

``DataError`` subclasses signal bad input data (CLI exit code 2); everything
else deriving from ``UsabilityError`` is a contract violation by the caller.
"""

from __future__ import annotations


class UsabilityError(Exception):
    """Base class for all package errors."""


class DataError(UsabilityError):
    """Input data is malformed or cannot be used."""


# survey ingestion
class MissingHeader(DataError):
    pass


class UnknownQuestionColumn(DataError):
    pass


class OutOfRangeResponse(DataError):
    def __init__(self, row: int, column: str, value: object = None):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}, column {column!r}: response {value!r} not in 1..5")


class DuplicateRespondentId(DataError):
    pass


class InconsistentCounts(DataError):
    pass


class EmptyBands(UsabilityError):
    pass


class NonMonotoneBands(UsabilityError):
    pass


# genetic algorithm
class WrongGeneCount(UsabilityError):
    pass


class NegativeObjective(UsabilityError):
    pass


class ZeroTotalFitness(UsabilityError):
    pass


class GeneCountMismatch(UsabilityError):
    pass


# models
class DimensionMismatch(UsabilityError):
    pass


class SingleClassInput(DataError):
    pass


class NonFiniteFeature(DataError):
    pass


class EmptyGrid(UsabilityError):
    pass


class InvalidRange(UsabilityError):
    pass


# selection / report
class EmptyMask(UsabilityError):
    pass


class FeatureUniverseMismatch(UsabilityError):
    pass


class EmptyRuns(UsabilityError):
    pass


# evaluation
class ClassTooSmall(DataError):
    pass


class TooFewSamples(DataError):
    pass


class LengthMismatch(UsabilityError):
    pass


class UnknownClass(UsabilityError):
    pass


class EmptyMatrix(UsabilityError):
    pass
