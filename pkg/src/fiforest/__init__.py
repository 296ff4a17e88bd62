"""Isolation-forest anomaly detection for functional data.

Curves are isolated by recursive random splits on their inner products
with randomly drawn dictionary atoms; anomalous curves isolate in few
splits and receive scores near 1. The package also ships classical
isolation-forest baselines on plain vectors, synthetic curve generators,
an AUC benchmark harness for labeled archives, and a CLI (``fif``).

Typical library use::

    from fiforest import FunctionalIsolationForest
    from fiforest.synthetic import gen_cuevas105

    data = gen_cuevas105(seed=7)
    est = FunctionalIsolationForest(random_state=0).fit(data)
    scores = est.score_samples(data)
"""

from .baseline import IFForest, VectorDataset, fit_if, score_if
from .data import (
    FunctionalDataset,
    TimeGrid,
    finite_difference,
    load_dataset,
    load_ucr,
    save_dataset,
    uniform_grid,
)
from .dictionaries import Atom, DictionarySpec, Pool, materialize, sample_atom
from .errors import ConfigError, DataError, FifError
from .estimators import DepthEmbedding, FunctionalIsolationForest, VectorIsolationForest
from .evaluation import BenchmarkTask, auc, run_benchmark, run_stability_sweep, ucr_task
from .forest import FIForest, ForestConfig, ScoreReport, depth_map, fit
from .model_io import load_model, save_model
from .products import InnerProductSpec, combined_inner, deriv_inner, l2_inner, l2_norm
from .synthetic import generate

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "BenchmarkTask",
    "ConfigError",
    "DataError",
    "DepthEmbedding",
    "DictionarySpec",
    "FIForest",
    "FifError",
    "ForestConfig",
    "FunctionalDataset",
    "FunctionalIsolationForest",
    "IFForest",
    "InnerProductSpec",
    "Pool",
    "ScoreReport",
    "TimeGrid",
    "VectorDataset",
    "VectorIsolationForest",
    "auc",
    "combined_inner",
    "depth_map",
    "deriv_inner",
    "finite_difference",
    "fit",
    "fit_if",
    "generate",
    "l2_inner",
    "l2_norm",
    "load_dataset",
    "load_model",
    "load_ucr",
    "materialize",
    "run_benchmark",
    "run_stability_sweep",
    "sample_atom",
    "save_dataset",
    "save_model",
    "score_if",
    "ucr_task",
    "uniform_grid",
]
