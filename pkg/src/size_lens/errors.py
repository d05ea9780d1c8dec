"""Exception hierarchy shared across the package.

Errors fall into three families so the command line can map them onto
stable exit codes: data problems (bad or inconsistent input), solver
problems (optimization or synthesis failure), and statistics problems
(degenerate or impossible computations).
"""

__all__ = [
    "SizeLensError",
    "DataError",
    "SolverError",
    "StatsError",
    "NonBinaryCell",
    "DuplicateLabel",
    "TooFewObjects",
    "TooFewFeatures",
    "NotSquare",
    "AsymmetryExceedsTolerance",
    "NonFiniteCell",
    "ParseError",
    "LabelAxisMismatch",
    "LabelMismatch",
    "AllFeaturesFiltered",
    "EmptyIntersection",
    "StrictMismatch",
    "UnknownObject",
    "NegativeDistance",
    "DegenerateColumn",
    "DegenerateColumnWarning",
    "RetryLimitExceeded",
    "InvalidHypothesisSpace",
    "InconsistentExamples",
    "ZeroVariance",
    "LengthMismatch",
    "NoActiveFeatures",
    "ZeroSizeActiveFeature",
    "TooFewPoints",
    "TooFewDatasets",
]


class SizeLensError(Exception):
    """Base class for every error raised by this package."""


class DataError(SizeLensError):
    """Invalid or inconsistent input data."""


class SolverError(SizeLensError):
    """Optimization or synthetic-data generation failure."""


class StatsError(SizeLensError):
    """Statistical computation is degenerate or impossible."""


# data / ingestion

class NonBinaryCell(DataError):
    """A feature cell is neither 0 nor 1."""


class DuplicateLabel(DataError):
    """An object or feature label occurs more than once."""


class TooFewObjects(DataError):
    """Fewer than two objects; no pairs to work with."""


class TooFewFeatures(DataError):
    """A feature matrix needs at least one feature column."""


class NotSquare(DataError):
    """A similarity grid is not square."""


class AsymmetryExceedsTolerance(DataError):
    """Similarity grid asymmetry is above the symmetrization tolerance."""


class NonFiniteCell(DataError):
    """A numeric cell is NaN or infinite."""


class ParseError(DataError):
    """A file could not be parsed; carries file, row, and column context."""

    def __init__(self, message, path=None, row=None, column=None):
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.path = path
        self.row = row
        self.column = column


class LabelAxisMismatch(DataError):
    """Row labels and column labels of a similarity grid disagree."""


class LabelMismatch(DataError):
    """Two matrices disagree on object labels or their order."""


class AllFeaturesFiltered(DataError):
    """A size filter removed every feature column."""


class EmptyIntersection(DataError):
    """Aligned object sets share fewer than two names."""


class StrictMismatch(DataError):
    """Strict alignment failed; carries the missing names from each side."""

    def __init__(self, missing_in_features=(), missing_in_similarity=()):
        self.missing_in_features = tuple(missing_in_features)
        self.missing_in_similarity = tuple(missing_in_similarity)
        parts = []
        if self.missing_in_features:
            parts.append(f"missing from features: {sorted(self.missing_in_features)}")
        if self.missing_in_similarity:
            parts.append(f"missing from similarity: {sorted(self.missing_in_similarity)}")
        super().__init__("object names do not match under strict alignment; " + "; ".join(parts))


class UnknownObject(DataError):
    """An object name is not part of the space or matrix at hand."""


class NegativeDistance(DataError):
    """A psychological distance must be non-negative."""


# solver / generation

class DegenerateColumn(SolverError):
    """The solver cannot make progress past numerically singular columns."""


class DegenerateColumnWarning(UserWarning):
    """A numerically singular column was dropped from the passive set."""


class RetryLimitExceeded(SolverError):
    """Synthetic data generation exhausted its retry budget."""


class InvalidHypothesisSpace(SolverError):
    """A hypothesis space violates its construction invariants."""


class InconsistentExamples(SolverError):
    """No positive-prior hypothesis contains all observed examples."""


# statistics

class ZeroVariance(StatsError):
    """An input vector is (numerically) constant."""


class LengthMismatch(StatsError):
    """Paired vectors differ in length, or a vector is too short."""


class NoActiveFeatures(StatsError):
    """Every fitted weight is zero; there are no points to analyze."""


class ZeroSizeActiveFeature(StatsError):
    """A feature with positive weight has size zero; log-size is undefined."""


class TooFewPoints(StatsError):
    """Not enough points for the requested statistic or plot."""


class TooFewDatasets(StatsError):
    """Aggregation needs at least two dataset rows."""
