"""Isolation forests over curves: fitting, scoring, depths, importance.

Randomness protocol (what reproducibility and the tests rely on):

* ``SeedSequence(seed)`` is spawned into ``n_trees + 1`` child streams.
  Stream 0 materializes the dictionary when a finite atom table is
  requested; stream l + 1 drives tree l end to end.
* Each tree first draws its subsample: ``rng.choice(n, psi, replace=False)``
  when psi < n, the identity (no draw) when psi == n. Growth then follows
  the node draw order documented in fiforest.tree.

Because every tree owns its stream, fitting is reproducible for a given
(config, seed) regardless of how many worker threads build the trees.

Split handles inside nodes are small tagged tuples:
  ("table", i)  index into the forest-level atom table,
  ("train", r)  training row r acts as the atom (self dictionary),
  ("atom", a)   a free-standing Atom sampled at the split.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import FunctionalDataset, TimeGrid, as_value_array
from .dictionaries import (
    ENUMERABLE,
    Atom,
    DictionarySpec,
    Pool,
    contains_data_bound,
    materialize,
    sample_atom,
    spec_from_obj as dict_spec_from_obj,
)
from .errors import ConfigError, DataError
from .products import (
    CurvePack,
    InnerProductSpec,
    channel_specs,
    project_onto_atom,
    projection_table,
)
from .tree import (
    FITree,
    Leaf,
    avg_bst_path,
    grow,
    path_lengths,
    validate_height_limit,
)

MAX_DEFAULT_PSI = 256


@dataclass(frozen=True)
class ForestConfig:
    """Everything a fit depends on besides the data itself.

    ``psi`` is the per-tree subsample size (None: min(256, n) at fit time).
    ``height_limit`` is "auto" (ceil(log2(psi))), an int, or None for
    unbounded growth. ``threads`` only controls build parallelism and has
    no effect on the fitted forest.
    """

    seed: int
    n_trees: int = 100
    psi: int | None = None
    height_limit: int | str | None = "auto"
    min_leaf_size: int = 1
    dictionary: DictionarySpec | str | dict = "gaussian_wavelet"
    inner_product: object = "l2"
    threads: int = 1

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)):
            raise ConfigError("seed must be an integer")
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if self.psi is not None and self.psi < 2:
            raise ConfigError("psi must be >= 2 (a single curve cannot be split)")
        if self.min_leaf_size < 1:
            raise ConfigError("min_leaf_size must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.height_limit != "auto":
            validate_height_limit(self.height_limit)
        object.__setattr__(self, "dictionary", dict_spec_from_obj(self.dictionary))


def resolve_psi(psi: int | None, n: int) -> int:
    out = min(MAX_DEFAULT_PSI, n) if psi is None else psi
    if out > n:
        raise ConfigError(f"psi={out} exceeds the {n} available curves")
    if out < 2:
        raise ConfigError("psi must be >= 2")
    return out


def resolve_height_limit(height_limit, psi: int) -> int | None:
    if height_limit == "auto":
        return math.ceil(math.log2(psi))
    return validate_height_limit(height_limit)


class _TableSplitter:
    """Splits through a precomputed (rows x atoms) projection table."""

    def __init__(self, table: np.ndarray, n_atoms: int):
        self.table = table
        self.n_atoms = n_atoms

    def draw(self, rng):
        return ("table", int(rng.integers(0, self.n_atoms)))

    def project(self, idx, handle):
        return self.table[idx, handle[1]]


class _SelfSplitter:
    """Atoms are the tree's own subsample; projections come from the
    training Gram table."""

    def __init__(self, gram: np.ndarray, sub: np.ndarray):
        self.gram = gram
        self.sub = sub

    def draw(self, rng):
        pos = int(rng.integers(0, self.sub.size))
        return ("train", int(self.sub[pos]))

    def project(self, idx, handle):
        return self.gram[idx, handle[1]]


class _FreshSplitter:
    """Samples a new atom at every split (non-materialized families)."""

    def __init__(self, pack: CurvePack, spec: DictionarySpec, specs, pool: Pool | None):
        self.pack = pack
        self.spec = spec
        self.specs = specs
        self.pool = pool

    def draw(self, rng):
        return ("atom", sample_atom(self.spec, self.pack.grid, rng, self.pool, self.pack.d))

    def project(self, idx, handle):
        return project_onto_atom(self.pack, idx, handle[1].values, self.specs)


@dataclass(eq=False)
class FIForest:
    """A fitted functional isolation forest.

    Score semantics: scores lie in (0, 1], higher is more anomalous, and
    depth is 1 - score. ``atoms`` is the forest-level atom table when the
    dictionary was materialized or enumerated, else None.
    """

    config: ForestConfig
    grid: TimeGrid
    channels: int
    n_train: int
    psi: int
    height_limit: int | None
    specs: tuple[InnerProductSpec, ...]
    trees: list[FITree]
    c_psi: float
    atoms: list[Atom] | None = None
    atom_pack: CurvePack | None = field(default=None, repr=False)
    train_pack: CurvePack | None = field(default=None, repr=False)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def _query_pack(self, X) -> CurvePack:
        if isinstance(X, FunctionalDataset):
            if X.grid != self.grid:
                raise DataError("query grid differs from the training grid")
            values = X.values
        else:
            values = as_value_array(X, n_channels=self.channels)
            if values.shape[-1] != self.grid.p:
                raise DataError(
                    f"queries have {values.shape[-1]} points, the model expects {self.grid.p}"
                )
        if values.shape[1] != self.channels:
            raise DataError(f"queries have {values.shape[1]} channel(s), expected {self.channels}")
        return CurvePack(values, self.grid)

    def _projector(self, qpack: CurvePack):
        tables = {}

        def project(qidx, handle):
            tag, payload = handle
            if tag == "atom":
                return project_onto_atom(qpack, qidx, payload.values, self.specs)
            if tag not in tables:
                if tag == "table":
                    tables[tag] = projection_table(qpack, self.atom_pack, self.specs)
                else:
                    if self.train_pack is None:
                        raise ConfigError("model lacks training curves needed for scoring")
                    tables[tag] = projection_table(qpack, self.train_pack, self.specs)
            return tables[tag][qidx, payload]

        return project

    def mean_path_lengths(self, X) -> np.ndarray:
        qpack = self._query_pack(X)
        projector = self._projector(qpack)
        total = np.zeros(qpack.n)
        for tree in self.trees:
            total += path_lengths(tree.root, projector, qpack.n)
        return total / self.n_trees

    def score_samples(self, X) -> np.ndarray:
        """Anomaly score of each query curve (Eq.-style 2^(-h/c) aggregation)."""
        h = self.mean_path_lengths(X)
        return np.exp2(-h / self.c_psi)

    def score(self, x) -> float:
        return float(self.score_samples(x)[0])

    def depth(self, X) -> np.ndarray:
        """1 - score: near 1 for isolated curves, near 0 deep in the bulk."""
        return 1.0 - self.score_samples(X)

    def score_report(self, X) -> "ScoreReport":
        h = self.mean_path_lengths(X)
        scores = np.exp2(-h / self.c_psi)
        return ScoreReport(scores=scores, depths=1.0 - scores, mean_paths=h,
                           ranks=ranks_from_scores(scores))

    def direction_importance(self, mode: str = "naive") -> np.ndarray:
        """Credit per atom for splits that isolate a single curve.

        A split earns credit when its parent holds >= 3 curves and one
        child holds exactly 1. Naive mode adds 1; adaptive mode adds
        (parent size) / psi. Returns credits aligned with the atom table
        (or with training rows for the self dictionary).

        Raises:
            ConfigError: the dictionary has no stable finite identity
                (fresh-sampling families).
        """
        if mode not in ("naive", "adaptive"):
            raise ConfigError(f"unknown importance mode {mode!r}")
        if self.atoms is not None:
            credits = np.zeros(len(self.atoms))
        elif self.config.dictionary.family == "self":
            credits = np.zeros(self.n_train)
        else:
            raise ConfigError(
                "direction importance needs a finite dictionary "
                "(materialized, enumerable, or self)"
            )
        for tree in self.trees:
            stack = [tree.root]
            while stack:
                node = stack.pop()
                if isinstance(node, Leaf):
                    continue
                stack.append(node.left)
                stack.append(node.right)
                if node.size < 3:
                    continue
                for child in (node.left, node.right):
                    if child.size == 1:
                        credits[_handle_identity(node.split)] += (
                            1.0 if mode == "naive" else node.size / self.psi
                        )
        return credits

    def save(self, path) -> None:
        from .model_io import save_model

        save_model(self, path)


def _handle_identity(handle) -> int:
    tag, payload = handle
    if tag in ("table", "train"):
        return payload
    if tag == "atom" and "train_index" in payload.provenance:
        return payload.provenance["train_index"]
    raise ConfigError("split has no stable atom identity")


def ranks_from_scores(scores: np.ndarray) -> np.ndarray:
    """1-based ranks, highest score first; ties keep input order."""
    order = np.argsort(-scores, kind="stable")
    ranks = np.empty(scores.size, dtype=np.int64)
    ranks[order] = np.arange(1, scores.size + 1)
    return ranks


@dataclass
class ScoreReport:
    """Per-curve scoring results plus a CSV writer."""

    scores: np.ndarray
    depths: np.ndarray
    mean_paths: np.ndarray
    ranks: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("id,score,depth,rank\n")
            for i in range(self.scores.size):
                fh.write(
                    f"{i},{self.scores[i]:.12g},{self.depths[i]:.12g},{self.ranks[i]}\n"
                )


def fit(dataset: FunctionalDataset, config: ForestConfig) -> FIForest:
    """Grow a functional isolation forest on the dataset.

    See the module docstring for the randomness protocol. The dictionary
    is materialized into a forest-level atom table when it is enumerable
    or carries a finite size; the self family instead binds each tree's
    subsample as its pool.
    """
    if not isinstance(dataset, FunctionalDataset):
        raise ConfigError("fit expects a FunctionalDataset; see fiforest.data")
    n, d = dataset.n, dataset.d
    psi = resolve_psi(config.psi, n)
    height_limit = resolve_height_limit(config.height_limit, psi)
    specs = channel_specs(config.inner_product, d)
    dspec = config.dictionary
    train_pack = CurvePack(dataset.values, dataset.grid)
    streams = np.random.SeedSequence(config.seed).spawn(config.n_trees + 1)

    atoms = None
    atom_pack = None
    table = None
    gram = None
    if dspec.family in ENUMERABLE or (
        not contains_data_bound(dspec) and dspec.size is not None
    ):
        atoms = materialize(dspec, dataset.grid, np.random.default_rng(streams[0]),
                            n_channels=d)
        atom_pack = CurvePack(np.stack([a.values for a in atoms]), dataset.grid)
        table = projection_table(train_pack, atom_pack, specs)
    elif dspec.family == "self":
        gram = projection_table(train_pack, train_pack, specs)

    def build(l: int) -> FITree:
        rng = np.random.default_rng(streams[l + 1])
        sub = np.arange(n, dtype=np.intp) if psi == n else np.asarray(
            rng.choice(n, size=psi, replace=False), dtype=np.intp
        )
        if table is not None:
            splitter = _TableSplitter(table, len(atoms))
        elif gram is not None:
            splitter = _SelfSplitter(gram, sub)
        else:
            # The pool is only read by data-bound families (possibly inside
            # a mixture); building it is cheap either way.
            pool = Pool(values=train_pack.values[sub], indices=sub)
            splitter = _FreshSplitter(train_pack, dspec, specs, pool)
        root = grow(sub, 0, rng, splitter, height_limit, config.min_leaf_size)
        return FITree(root, psi, height_limit)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as ex:
            trees = list(ex.map(build, range(config.n_trees)))
    else:
        trees = [build(l) for l in range(config.n_trees)]

    return FIForest(
        config=config,
        grid=dataset.grid,
        channels=d,
        n_train=n,
        psi=psi,
        height_limit=height_limit,
        specs=specs,
        trees=trees,
        c_psi=avg_bst_path(psi),
        atoms=atoms,
        atom_pack=atom_pack,
        train_pack=train_pack,
    )


def score(forest: FIForest, x) -> float:
    """Score one curve; forest.score_samples handles batches."""
    return forest.score(x)


def depth(forest: FIForest, x) -> float:
    return 1.0 - score(forest, x)


def depth_map(forests: list[FIForest], X) -> np.ndarray:
    """Stack 1 - score columns from several forests into an (n, q) map.

    Each forest is typically fit on one class of training curves; rows of
    the result then locate each query relative to all q classes.
    """
    if not forests:
        raise ConfigError("depth_map needs at least one forest")
    return np.stack([f.depth(X) for f in forests], axis=1)
