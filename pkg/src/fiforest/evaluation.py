"""Benchmark protocol: AUC, labeled train/test tasks, stability sweeps.

The benchmark convention: fit on the training curves with labels ignored,
score the held-out test curves, and report the area under the ROC curve of
score against the anomaly labels. Tasks built from two-class archives can
cap how many anomaly rows are kept (the first ``cap`` in file order), which
reproduces the usual contaminated-training setup.

All CSV output from this module prints floats with 6 significant digits.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from . import baseline as _baseline
from . import forest as _forest
from .data import FunctionalDataset, load_dataset
from .dictionaries import DictionarySpec, spec_from_obj as dict_spec_from_obj
from .errors import ConfigError, DataError


def auc(scores, labels) -> float:
    """P(score of a random anomaly > score of a random normal), ties at 1/2.

    Computed from midranks (Mann-Whitney), which matches exhaustive pair
    counting exactly, including the handling of tied scores.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise DataError("auc expects matching 1-d scores and labels")
    anom = labels.astype(bool)
    n_a = int(anom.sum())
    n_n = scores.size - n_a
    if n_a == 0 or n_n == 0:
        raise DataError("auc needs at least one anomaly and one normal")
    ranks = rankdata(scores)
    u = ranks[anom].sum() - n_a * (n_a + 1) / 2
    return u / (n_a * n_n)


@dataclass(frozen=True)
class BenchmarkTask:
    """One labeled train/test evaluation unit.

    ``normal_labels`` and ``anomaly_labels`` pick the raw classes to keep;
    other classes are dropped. The caps keep only the first so-many
    anomaly rows (file order) of each split, or everything when None.
    """

    name: str
    train_path: str
    test_path: str
    normal_labels: tuple[int, ...]
    anomaly_labels: tuple[int, ...]
    train_anomaly_cap: int | None = None
    test_anomaly_cap: int | None = None


def select_classes(dataset: FunctionalDataset, normal, anomaly,
                   anomaly_cap: int | None = None) -> FunctionalDataset:
    """Restrict to the named classes and binarize labels, keeping file order."""
    if dataset.class_labels is None:
        raise DataError("dataset carries no class labels to select on")
    cls = dataset.class_labels
    normal_rows = np.flatnonzero(np.isin(cls, list(normal)))
    anomaly_rows = np.flatnonzero(np.isin(cls, list(anomaly)))
    if anomaly_cap is not None:
        anomaly_rows = anomaly_rows[:anomaly_cap]
    idx = np.sort(np.concatenate([normal_rows, anomaly_rows]))
    if idx.size == 0:
        raise DataError("no rows match the requested classes")
    sub = dataset.subset(idx)
    sub.labels = np.isin(sub.class_labels, list(anomaly)).astype(np.int64)
    return sub


@dataclass
class BenchmarkReport:
    rows: list[tuple[str, str, int, float]]
    mean_auc: float
    sd_auc: float

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("dataset,method,seed,auc\n")
            for dataset, method, seed, value in self.rows:
                fh.write(f"{dataset},{method},{seed},{value:.6g}\n")


def method_label(method: str, config: _forest.ForestConfig) -> str:
    if method != "fif":
        return method.replace("_", "-")
    dspec = config.dictionary
    parts = [f"fif-{dspec.family}"]
    spec = config.inner_product
    kinds = spec if isinstance(spec, (list, tuple)) else [spec]
    first = kinds[0]
    kind = first if isinstance(first, str) else getattr(first, "kind", first.get("kind", "l2"))
    parts.append(str(kind))
    return "-".join(parts)


def run_benchmark(task: BenchmarkTask, config: _forest.ForestConfig, seeds,
                  method: str = "fif", method_name: str | None = None) -> BenchmarkReport:
    """Fit/score/AUC once per seed; labels are never shown to the fit.

    ``method`` is "fif" or one of the vector baselines ("if_axis",
    "if_extended"), which run on the raw discretized values.
    """
    if method not in ("fif", "if_axis", "if_extended"):
        raise ConfigError(f"unknown benchmark method {method!r}")
    train = select_classes(load_dataset(task.train_path), task.normal_labels,
                           task.anomaly_labels, task.train_anomaly_cap)
    test = select_classes(load_dataset(task.test_path), task.normal_labels,
                          task.anomaly_labels, task.test_anomaly_cap)
    if train.grid != test.grid:
        raise DataError("train and test grids differ")
    label = method_name or method_label(method, config)
    rows = []
    for seed in seeds:
        cfg = replace(config, seed=int(seed))
        if method == "fif":
            forest = _forest.fit(train, cfg)
            scores = forest.score_samples(test)
        else:
            flat_train = train.values.reshape(train.n, -1)
            flat_test = test.values.reshape(test.n, -1)
            forest = _baseline.fit_if(flat_train, cfg, mode=method.removeprefix("if_"))
            scores = forest.score_samples(flat_test)
        rows.append((task.name, label, int(seed), auc(scores, test.labels)))
    values = np.array([r[3] for r in rows])
    return BenchmarkReport(rows=rows, mean_auc=float(values.mean()),
                           sd_auc=float(values.std(ddof=1)) if len(rows) > 1 else 0.0)


#: The thirteen two-class archive datasets used in the benchmark tables:
#: raw label mapping, anomaly caps per split, and the on-disk archive
#: directory each one lives in.
UCR_TASKS = {
    "Chinatown": dict(dirname="Chinatown", normal=(2,), anomaly=(1,), train_cap=4, test_cap=95),
    "Coffee": dict(dirname="Coffee", normal=(1,), anomaly=(0,), train_cap=5, test_cap=6),
    "ECGFiveDays": dict(dirname="ECGFiveDays", normal=(1,), anomaly=(2,), train_cap=2, test_cap=53),
    "ECG200": dict(dirname="ECG200", normal=(1,), anomaly=(-1,), train_cap=31, test_cap=36),
    "Handoutlines": dict(dirname="HandOutlines", normal=(1,), anomaly=(0,), train_cap=362, test_cap=133),
    "SonyRobotAI1": dict(dirname="SonyAIBORobotSurface1", normal=(2,), anomaly=(1,), train_cap=6, test_cap=343),
    "SonyRobotAI2": dict(dirname="SonyAIBORobotSurface2", normal=(2,), anomaly=(1,), train_cap=4, test_cap=365),
    "StarLightCurves": dict(dirname="StarLightCurves", normal=(3,), anomaly=(1, 2), train_cap=100, test_cap=3482),
    "TwoLeadECG": dict(dirname="TwoLeadECG", normal=(1,), anomaly=(2,), train_cap=2, test_cap=570),
    "Yoga": dict(dirname="Yoga", normal=(2,), anomaly=(1,), train_cap=10, test_cap=1393),
    "EOGHorizontal": dict(dirname="EOGHorizontalSignal", normal=(5,), anomaly=(6,), train_cap=10, test_cap=30),
    "CinECGTorso": dict(dirname="CinCECGTorso", normal=(3,), anomaly=(4,), train_cap=4, test_cap=345),
    "ECG5000": dict(dirname="ECG5000", normal=(1,), anomaly=(3, 4, 5), train_cap=31, test_cap=283),
}


def ucr_task(name: str, archive_dir) -> BenchmarkTask:
    """Build the registry task for one dataset under an archive directory.

    Expects the usual layout: <archive>/<dirname>/<dirname>_TRAIN.tsv and
    _TEST.tsv (a .txt extension is also accepted).
    """
    if name not in UCR_TASKS:
        raise ConfigError(f"unknown benchmark dataset {name!r}; known: {sorted(UCR_TASKS)}")
    entry = UCR_TASKS[name]
    base = Path(archive_dir) / entry["dirname"]
    paths = {}
    for split in ("TRAIN", "TEST"):
        for ext in (".tsv", ".txt", ".csv"):
            cand = base / f"{entry['dirname']}_{split}{ext}"
            if cand.exists():
                paths[split] = str(cand)
                break
        else:
            raise DataError(f"{name}: no {split} file found under {base}")
    return BenchmarkTask(
        name=name,
        train_path=paths["TRAIN"],
        test_path=paths["TEST"],
        normal_labels=entry["normal"],
        anomaly_labels=entry["anomaly"],
        train_anomaly_cap=entry["train_cap"],
        test_anomaly_cap=entry["test_cap"],
    )


SWEEP_AXES = ("n_trees", "psi", "height_limit", "size", "dictionary")


def _apply_axis(config: _forest.ForestConfig, axis: str, value):
    if axis in ("n_trees", "psi", "height_limit"):
        return replace(config, **{axis: value})
    if axis == "size":
        return replace(config, dictionary=replace(config.dictionary, size=value))
    if axis == "dictionary":
        spec = dict_spec_from_obj(value)
        return replace(config, dictionary=spec)
    raise ConfigError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")


@dataclass
class SweepResult:
    axis: str
    rows: list[tuple[object, int, str, float]]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("axis_value,repeat,probe_id,score\n")
            for value, repeat, probe, score in self.rows:
                fh.write(f"{value},{repeat},{probe},{score:.6g}\n")

    def scores(self, axis_value, probe_id: str) -> np.ndarray:
        return np.array(
            [s for v, _, pid, s in self.rows if v == axis_value and pid == probe_id]
        )


def run_stability_sweep(dataset: FunctionalDataset, probes, axis: str, values,
                        repeats: int, seed: int,
                        config: _forest.ForestConfig) -> SweepResult:
    """Refit along one hyperparameter axis and score fixed probe curves.

    For each axis value and repeat, a forest is fit on ``dataset`` with a
    seed derived from (seed, value index, repeat) and the probe curves are
    scored. Probe ids are "x0", "x1", ... in row order.
    """
    if repeats < 1:
        raise ConfigError("repeats must be >= 1")
    probes_ds = probes if isinstance(probes, FunctionalDataset) else None
    probe_values = probes_ds.values if probes_ds is not None else np.asarray(probes)
    n_probes = probe_values.shape[0]
    ids = [f"x{i}" for i in range(n_probes)]
    rows = []
    for vi, value in enumerate(values):
        cell_config = _apply_axis(config, axis, value)
        for rep in range(repeats):
            run_seed = int(np.random.SeedSequence((seed, vi, rep)).generate_state(1)[0])
            forest = _forest.fit(dataset, replace(cell_config, seed=run_seed))
            scores = forest.score_samples(probe_values)
            for pid, s in zip(ids, scores):
                rows.append((value, rep, pid, float(s)))
    return SweepResult(axis=axis, rows=rows)
