"""Input coercion and fitted-state checks shared by the estimator layer."""

from __future__ import annotations

import numpy as np
from sklearn.exceptions import NotFittedError

from .data import FunctionalDataset, TimeGrid, as_value_array, uniform_grid
from .errors import DataError


def as_dataset(X, grid=None) -> FunctionalDataset:
    """Coerce X to a FunctionalDataset.

    X may already be one (grid must then be None or agree), or an array of
    shape (n, p) / (n, d, p). Without an explicit grid, points are assumed
    equispaced on [0, 1].
    """
    if isinstance(X, FunctionalDataset):
        if grid is not None and as_grid(grid) != X.grid:
            raise DataError("dataset already carries a different grid")
        return X
    values = as_value_array(X)
    g = uniform_grid(values.shape[-1]) if grid is None else as_grid(grid)
    return FunctionalDataset(grid=g, values=values)


def as_grid(grid) -> TimeGrid:
    if isinstance(grid, TimeGrid):
        return grid
    return TimeGrid(np.asarray(grid, dtype=np.float64))


def as_matrix(X) -> np.ndarray:
    """Coerce X to a finite (n, d) float matrix."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, np.newaxis]
    if arr.ndim != 2:
        raise DataError("expected a 2-d matrix of samples")
    if not np.all(np.isfinite(arr)):
        raise DataError("input contains NaN or infinity")
    return arr


def ensure_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"this {type(estimator).__name__} instance is not fitted yet; call fit first"
        )
