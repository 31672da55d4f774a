"""scikit-learn wrapper for the sampled support-function embedding.

Kept apart from :mod:`setvalued.radstrom` so that importing the core
package does not import scikit-learn.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .radstrom import embed


class SupportEmbedding(TransformerMixin, BaseEstimator):
    """Maps dense sets to their support vectors on a seeded direction sample.

    ``fit`` draws the directions for the sets' space; ``transform`` returns an
    array of shape ``(n_sets, n_directions)``.  Euclidean distances between
    rows are not Hausdorff distances; use the max-norm of row differences.
    """

    def __init__(self, n_directions: int = 256, seed: int = 0):
        self.n_directions = n_directions
        self.seed = seed

    def fit(self, X, y=None):
        X = list(X)
        if not X:
            raise ValueError("need at least one set")
        spaces = {A.space for A in X}
        if len(spaces) != 1:
            raise ValueError("all sets must share one space")
        self.space_ = spaces.pop()
        self.directions_ = self.space_.sample_directions(self.n_directions, self.seed)
        return self

    def transform(self, X):
        check_is_fitted(self, "directions_")
        return np.vstack([embed(A, self.directions_).values for A in X])
