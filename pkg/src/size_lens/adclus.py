"""Additive clustering with fixed binary features.

Pairwise similarity is modeled as a non-negatively weighted sum of shared
features: s_ij = sum_k w_k f_ik f_jk over i < j. With the feature matrix
fixed, the weights are the least-squares solution over the strict upper
triangle, constrained to w >= 0. Diagonal cells never enter the fit or the
fit statistic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LabelMismatch, LengthMismatch, ZeroVariance
from .matrices import FeatureMatrix, PairIndex, SimilarityMatrix, upper_triangle_pairs
from .nnls import NnlsProblem, solve_nnls
from .sizelaw import pearson

__all__ = [
    "DesignMatrix",
    "WeightSolution",
    "build_design",
    "fit",
    "predict",
    "r_squared",
    "upper_triangle_values",
]


@dataclass(frozen=True)
class DesignMatrix:
    """One row per object pair; cell (p, k) = f_ik * f_jk for pair p = (i, j)."""

    cells: np.ndarray  # pairs x features, float64
    pair_order: tuple[PairIndex, ...]
    feature_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "cells", np.asarray(self.cells, dtype=np.float64))
        object.__setattr__(self, "pair_order", tuple(self.pair_order))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))


@dataclass(frozen=True)
class WeightSolution:
    """Fitted non-negative feature weights plus fit diagnostics.

    ``nonzero_feature_indices`` is the solver's active set; a weight counts
    as non-zero exactly when it is in that set. ``r_squared`` is the squared
    Pearson correlation between predicted and observed off-diagonal
    similarities (NaN when either side is constant).
    """

    feature_names: tuple[str, ...]
    weights: np.ndarray
    nonzero_feature_indices: tuple[int, ...]
    feature_sizes: np.ndarray
    r_squared: float
    feature_ratio: tuple[int, int]
    residual_norm: float
    iterations: int
    converged: bool
    intercept_weight: float = 0.0


def upper_triangle_values(similarity: SimilarityMatrix) -> np.ndarray:
    """Off-diagonal cells in row-major pair order."""
    n = similarity.n_objects
    ii, jj = np.triu_indices(n, k=1)
    return similarity.cells[ii, jj]


def build_design(features: FeatureMatrix) -> DesignMatrix:
    """Element-wise products of feature rows for every object pair."""
    n = features.n_objects
    ii, jj = np.triu_indices(n, k=1)
    cells = (features.cells[ii] * features.cells[jj]).astype(np.float64)
    return DesignMatrix(
        cells=cells,
        pair_order=tuple(upper_triangle_pairs(n)),
        feature_names=features.feature_names,
    )


def predict(features: FeatureMatrix, weights) -> SimilarityMatrix:
    """Model similarities for the given weights.

    The diagonal holds each object's self-sum of weighted features; it is a
    model-internal quantity and stays out of every fit statistic.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (features.n_features,):
        raise LengthMismatch(
            f"weights have shape {w.shape}, expected ({features.n_features},)"
        )
    if (w < 0.0).any():
        raise ValueError("weights must be non-negative")
    f = features.cells.astype(np.float64)
    full = (f * w) @ f.T
    # Mirror the upper triangle so the stored matrix is exactly symmetric.
    cells = np.triu(full) + np.triu(full, k=1).T
    return SimilarityMatrix(features.object_names, cells)


def _squared_pearson(predicted_values: np.ndarray, observed_values: np.ndarray) -> float:
    r = pearson(predicted_values, observed_values)
    return r * r


def r_squared(predicted: SimilarityMatrix, observed: SimilarityMatrix) -> float:
    """Squared Pearson correlation between off-diagonal similarities."""
    if predicted.object_names != observed.object_names:
        raise LabelMismatch("predicted and observed matrices label different objects")
    return _squared_pearson(upper_triangle_values(predicted), upper_triangle_values(observed))


def fit(
    features: FeatureMatrix,
    similarity: SimilarityMatrix,
    kkt_tolerance: float | None = None,
    max_iterations: int | None = None,
    with_intercept: bool = False,
) -> WeightSolution:
    """Fit non-negative feature weights to observed similarities.

    The optional intercept adds a constant column to the design; its
    coefficient shares the non-negativity constraint and is reported
    separately from the feature weights.
    """
    if features.object_names != similarity.object_names:
        raise LabelMismatch(
            "feature and similarity matrices label different objects "
            f"({features.object_names[:3]}... vs {similarity.object_names[:3]}...)"
        )
    design = build_design(features)
    target = upper_triangle_values(similarity)
    columns = design.cells
    if with_intercept:
        columns = np.hstack([columns, np.ones((columns.shape[0], 1))])
    solution = solve_nnls(
        NnlsProblem(columns, target),
        kkt_tolerance=kkt_tolerance,
        max_iterations=max_iterations,
    )
    k = features.n_features
    weights = solution.weights[:k]
    intercept_weight = float(solution.weights[k]) if with_intercept else 0.0
    active = tuple(i for i in solution.active_set if i < k)
    try:
        if with_intercept:
            fitted = design.cells @ weights + intercept_weight
            r2 = _squared_pearson(fitted, target)
        else:
            r2 = r_squared(predict(features, weights), similarity)
    except ZeroVariance:
        r2 = float("nan")
    return WeightSolution(
        feature_names=features.feature_names,
        weights=weights,
        nonzero_feature_indices=active,
        feature_sizes=features.feature_sizes,
        r_squared=r2,
        feature_ratio=(len(active), k),
        residual_norm=solution.residual_norm,
        iterations=solution.iterations,
        converged=solution.converged,
        intercept_weight=intercept_weight,
    )
