"""Classical isolation forests on plain vectors, sharing the tree engine.

Two split modes:

* ``axis``: pick one coordinate uniformly and threshold it, as in the
  original isolation forest.
* ``extended``: pick a uniformly random direction on the unit sphere
  (a normalized Gaussian draw) and threshold the projection onto it.

Both reuse fiforest.tree for growth, path lengths, and scoring, so every
cut-draw and leaf rule matches the functional forest exactly. The
randomness protocol also mirrors fiforest.forest: seed -> n_trees + 1
spawned streams, stream 0 unused here, stream l + 1 driving tree l.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .forest import ForestConfig, ScoreReport, ranks_from_scores, resolve_height_limit, resolve_psi
from .tree import FITree, avg_bst_path, grow, path_lengths

MODES = ("axis", "extended")


@dataclass(eq=False)
class VectorDataset:
    """An (n, d) value matrix with optional 0/1 anomaly labels."""

    values: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim == 1:
            self.values = self.values[:, np.newaxis]
        if self.values.ndim != 2:
            raise DataError("vector data must be a 2-d matrix")
        if not np.all(np.isfinite(self.values)):
            raise DataError("vector data contains NaN or infinity")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.values.shape[0],):
                raise DataError("labels must have one entry per row")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


class _AxisSplitter:
    """Handle: ("coord", j). Draws one coordinate index per split."""

    def __init__(self, X: np.ndarray):
        self.X = X

    def draw(self, rng):
        return ("coord", int(rng.integers(0, self.X.shape[1])))

    def project(self, idx, handle):
        return self.X[idx, handle[1]]


class _DirectionSplitter:
    """Handle: ("dir", u). Draws d Gaussians and normalizes them."""

    def __init__(self, X: np.ndarray):
        self.X = X

    def draw(self, rng):
        g = rng.standard_normal(self.X.shape[1])
        return ("dir", g / np.linalg.norm(g))

    def project(self, idx, handle):
        return self.X[idx] @ handle[1]


@dataclass(eq=False)
class IFForest:
    """Fitted vector isolation forest (axis or extended splits)."""

    config: ForestConfig
    mode: str
    d: int
    n_train: int
    psi: int
    height_limit: int | None
    trees: list[FITree]
    c_psi: float

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def _as_matrix(self, X) -> np.ndarray:
        arr = np.asarray(X, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[np.newaxis, :] if arr.size == self.d else arr[:, np.newaxis]
        if arr.ndim != 2 or arr.shape[1] != self.d:
            raise DataError(f"queries must have {self.d} column(s)")
        if not np.all(np.isfinite(arr)):
            raise DataError("queries contain NaN or infinity")
        return arr

    def mean_path_lengths(self, X) -> np.ndarray:
        Q = self._as_matrix(X)

        def projector(qidx, handle):
            if handle[0] == "coord":
                return Q[qidx, handle[1]]
            return Q[qidx] @ handle[1]

        total = np.zeros(Q.shape[0])
        for tree in self.trees:
            total += path_lengths(tree.root, projector, Q.shape[0])
        return total / self.n_trees

    def score_samples(self, X) -> np.ndarray:
        return np.exp2(-self.mean_path_lengths(X) / self.c_psi)

    def score(self, x) -> float:
        return float(self.score_samples(np.atleast_2d(np.asarray(x, dtype=np.float64)))[0])

    def score_report(self, X) -> ScoreReport:
        h = self.mean_path_lengths(X)
        scores = np.exp2(-h / self.c_psi)
        return ScoreReport(scores=scores, depths=1.0 - scores, mean_paths=h,
                           ranks=ranks_from_scores(scores))

    def save(self, path) -> None:
        from .model_io import save_model

        save_model(self, path)


def fit_if(data, config: ForestConfig, mode: str = "axis") -> IFForest:
    """Fit a vector isolation forest.

    ``data`` is a VectorDataset or an (n, d) array. The config's dictionary
    and inner_product fields are ignored here; everything else (trees,
    subsampling, height limit, leaf rule, seeding) behaves exactly as in
    the functional fit.
    """
    if mode not in MODES:
        raise ConfigError(f"unknown baseline mode {mode!r}; choose from {MODES}")
    ds = data if isinstance(data, VectorDataset) else VectorDataset(values=data)
    n = ds.n
    psi = resolve_psi(config.psi, n)
    height_limit = resolve_height_limit(config.height_limit, psi)
    streams = np.random.SeedSequence(config.seed).spawn(config.n_trees + 1)
    splitter_cls = _AxisSplitter if mode == "axis" else _DirectionSplitter
    splitter = splitter_cls(ds.values)

    def build(l: int) -> FITree:
        rng = np.random.default_rng(streams[l + 1])
        sub = np.arange(n, dtype=np.intp) if psi == n else np.asarray(
            rng.choice(n, size=psi, replace=False), dtype=np.intp
        )
        root = grow(sub, 0, rng, splitter, height_limit, config.min_leaf_size)
        return FITree(root, psi, height_limit)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as ex:
            trees = list(ex.map(build, range(config.n_trees)))
    else:
        trees = [build(l) for l in range(config.n_trees)]

    return IFForest(
        config=config,
        mode=mode,
        d=ds.d,
        n_train=n,
        psi=psi,
        height_limit=height_limit,
        trees=trees,
        c_psi=avg_bst_path(psi),
    )


def score_if(forest: IFForest, x) -> float:
    """Score one vector; forest.score_samples handles batches."""
    return forest.score(x)
