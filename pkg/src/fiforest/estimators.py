"""Estimator wrappers with the usual fit / score_samples / transform surface.

These exist so the forests drop into sklearn-style workflows (clone,
get_params, pipelines). All real work happens in fiforest.forest and
fiforest.baseline; the wrappers only coerce inputs, resolve seeds, and
store the fitted engine object on a trailing-underscore attribute.

Scores follow this package's convention: in (0, 1], higher means more
anomalous. Note this is the opposite sign of sklearn's own outlier
detectors, which is why these classes expose ``score_samples`` but do not
claim the OutlierMixin contract.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import baseline as _baseline
from . import forest as _forest
from .errors import ConfigError
from .validation import as_dataset, as_matrix, ensure_fitted


def _resolve_seed(random_state) -> int:
    if random_state is None:
        return int(np.random.SeedSequence().entropy % (2**63))
    if isinstance(random_state, (int, np.integer)):
        return int(random_state)
    raise ConfigError("random_state must be an int or None")


class FunctionalIsolationForest(BaseEstimator):
    """Anomaly scoring for curves via randomized dictionary projections.

    Parameters mirror fiforest.forest.ForestConfig; see that module for
    the exact semantics. ``dictionary`` and ``inner_product`` accept the
    same strings, dicts, or spec objects as the config.

    Examples:
        >>> from fiforest.synthetic import gen_cuevas105
        >>> est = FunctionalIsolationForest(
        ...     dictionary="gaussian_wavelet",
        ...     inner_product={"kind": "combined", "alpha": 0.5},
        ...     random_state=0,
        ... )
        >>> scores = est.fit(gen_cuevas105(seed=1)).score_samples(
        ...     gen_cuevas105(seed=1)
        ... )
    """

    def __init__(self, n_estimators=100, subsample_size=None, height_limit="auto",
                 min_leaf_size=1, dictionary="gaussian_wavelet", inner_product="l2",
                 grid=None, random_state=None, n_jobs=1):
        self.n_estimators = n_estimators
        self.subsample_size = subsample_size
        self.height_limit = height_limit
        self.min_leaf_size = min_leaf_size
        self.dictionary = dictionary
        self.inner_product = inner_product
        self.grid = grid
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        """Fit on curves; y is ignored and accepted for API compatibility."""
        ds = as_dataset(X, self.grid)
        config = _forest.ForestConfig(
            seed=_resolve_seed(self.random_state),
            n_trees=self.n_estimators,
            psi=self.subsample_size,
            height_limit=self.height_limit,
            min_leaf_size=self.min_leaf_size,
            dictionary=self.dictionary,
            inner_product=self.inner_product,
            threads=self.n_jobs,
        )
        self.forest_ = _forest.fit(ds, config)
        self.n_features_in_ = ds.p
        return self

    def score_samples(self, X) -> np.ndarray:
        ensure_fitted(self, "forest_")
        return self.forest_.score_samples(X)

    def depth(self, X) -> np.ndarray:
        ensure_fitted(self, "forest_")
        return self.forest_.depth(X)

    def score_report(self, X) -> _forest.ScoreReport:
        ensure_fitted(self, "forest_")
        return self.forest_.score_report(X)

    def direction_importance(self, mode: str = "naive") -> np.ndarray:
        ensure_fitted(self, "forest_")
        return self.forest_.direction_importance(mode)


class VectorIsolationForest(BaseEstimator):
    """Classical isolation forest on vectors; mode picks the split family.

    mode="axis" thresholds one coordinate per split, mode="extended"
    thresholds the projection onto a random unit direction.
    """

    def __init__(self, mode="axis", n_estimators=100, subsample_size=None,
                 height_limit="auto", min_leaf_size=1, random_state=None, n_jobs=1):
        self.mode = mode
        self.n_estimators = n_estimators
        self.subsample_size = subsample_size
        self.height_limit = height_limit
        self.min_leaf_size = min_leaf_size
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        M = as_matrix(X)
        config = _forest.ForestConfig(
            seed=_resolve_seed(self.random_state),
            n_trees=self.n_estimators,
            psi=self.subsample_size,
            height_limit=self.height_limit,
            min_leaf_size=self.min_leaf_size,
            threads=self.n_jobs,
        )
        self.forest_ = _baseline.fit_if(M, config, mode=self.mode)
        self.n_features_in_ = M.shape[1]
        return self

    def score_samples(self, X) -> np.ndarray:
        ensure_fitted(self, "forest_")
        return self.forest_.score_samples(as_matrix(X))


class DepthEmbedding(BaseEstimator, TransformerMixin):
    """Per-class anomaly depths as a feature map.

    fit(X, y) grows one functional forest per class of y (sorted order);
    transform(X) returns the (n, q) matrix of 1 - score against each
    class forest. Rows land in [0, 1]^q, near the axes' high end for
    curves alien to the corresponding class.
    """

    def __init__(self, n_estimators=100, subsample_size=None, height_limit="auto",
                 min_leaf_size=1, dictionary="gaussian_wavelet", inner_product="l2",
                 grid=None, random_state=None, n_jobs=1):
        self.n_estimators = n_estimators
        self.subsample_size = subsample_size
        self.height_limit = height_limit
        self.min_leaf_size = min_leaf_size
        self.dictionary = dictionary
        self.inner_product = inner_product
        self.grid = grid
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y):
        ds = as_dataset(X, self.grid)
        y = np.asarray(y)
        if y.shape != (ds.n,):
            raise ConfigError("y must assign one class per curve")
        base_seed = _resolve_seed(self.random_state)
        self.classes_ = np.unique(y)
        self.forests_ = []
        for k, cls in enumerate(self.classes_):
            seed_k = int(np.random.SeedSequence((base_seed, k)).generate_state(1)[0])
            config = _forest.ForestConfig(
                seed=seed_k,
                n_trees=self.n_estimators,
                psi=self.subsample_size,
                height_limit=self.height_limit,
                min_leaf_size=self.min_leaf_size,
                dictionary=self.dictionary,
                inner_product=self.inner_product,
                threads=self.n_jobs,
            )
            self.forests_.append(_forest.fit(ds.subset(np.flatnonzero(y == cls)), config))
        return self

    def transform(self, X) -> np.ndarray:
        ensure_fitted(self, "forests_")
        return _forest.depth_map(self.forests_, X)
