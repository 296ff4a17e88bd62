"""Curve containers, time grids, discrete derivatives, and dataset files.

A "curve" here is a function observed on a fixed grid of points in [0, 1].
Datasets hold an (n, d, p) value array: n curves, d channels per curve, p
grid points. Univariate data (d = 1) can be supplied as plain (n, p) arrays
and is reshaped on the way in.

Two file formats are supported:

* UCR-style delimited text: one row per curve, class label first, then the
  p observed values, tab or comma separated. No header.
* The package's own CSV: a ``# grid:`` header carrying the grid points
  (plus ``# channels:`` when d > 1), then ``label,v_1,...,v_{d*p}`` rows.
  Values are written with ``repr`` so a save/load round trip is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing observation points inside [0, 1]."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 1:
            raise DataError("grid must be one-dimensional")
        if pts.size < 2:
            raise DataError("grid needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise DataError("grid contains non-finite values")
        if np.any(np.diff(pts) <= 0):
            raise DataError("grid points must be strictly increasing")
        if pts[0] < 0.0 or pts[-1] > 1.0:
            raise DataError("grid must lie within [0, 1]")
        object.__setattr__(self, "points", pts)

    @property
    def p(self) -> int:
        return self.points.size

    def __eq__(self, other) -> bool:
        return isinstance(other, TimeGrid) and np.array_equal(self.points, other.points)


def uniform_grid(p: int) -> TimeGrid:
    """Equispaced grid of p points spanning [0, 1]."""
    if p < 2:
        raise DataError("grid needs at least 2 points")
    return TimeGrid(np.linspace(0.0, 1.0, p))


def as_value_array(values, n_channels: int | None = None) -> np.ndarray:
    """Coerce curve values to a float64 (n, d, p) array.

    Accepts (n, p) for univariate data, or (n, d, p). A single curve can be
    passed as (p,) or (d, p) and comes back with n = 1.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[np.newaxis, np.newaxis, :]
    elif arr.ndim == 2:
        if n_channels is not None and arr.shape[0] == n_channels and n_channels > 1:
            arr = arr[np.newaxis, :, :]
        else:
            arr = arr[:, np.newaxis, :]
    elif arr.ndim != 3:
        raise DataError(f"curve values must have 1 to 3 axes, got {arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise DataError("curve values contain NaN or infinity")
    if n_channels is not None and arr.shape[1] != n_channels:
        raise DataError(f"expected {n_channels} channel(s), got {arr.shape[1]}")
    return arr


@dataclass(eq=False)
class FunctionalDataset:
    """Curves on a shared grid, with optional anomaly and class labels.

    Attributes:
        grid: the common observation grid.
        values: (n, d, p) float array of observed values.
        labels: optional 0/1 ints, 1 marking an anomaly.
        class_labels: optional raw integer class labels, as read from a
            benchmark file, before any normal/anomaly mapping is applied.
    """

    grid: TimeGrid
    values: np.ndarray
    labels: np.ndarray | None = None
    class_labels: np.ndarray | None = None

    def __post_init__(self):
        self.values = as_value_array(self.values)
        if self.values.shape[-1] != self.grid.p:
            raise DataError(
                f"curves have {self.values.shape[-1]} points but grid has {self.grid.p}"
            )
        for name in ("labels", "class_labels"):
            lab = getattr(self, name)
            if lab is None:
                continue
            lab = np.asarray(lab, dtype=np.int64)
            if lab.shape != (self.n,):
                raise DataError(f"{name} must have one entry per curve")
            setattr(self, name, lab)
        if self.labels is not None and not np.isin(self.labels, (0, 1)).all():
            raise DataError("labels must be 0 (normal) or 1 (anomaly)")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def p(self) -> int:
        return self.values.shape[2]

    def subset(self, indices) -> "FunctionalDataset":
        idx = np.asarray(indices, dtype=np.intp)
        return FunctionalDataset(
            grid=self.grid,
            values=self.values[idx],
            labels=None if self.labels is None else self.labels[idx],
            class_labels=None if self.class_labels is None else self.class_labels[idx],
        )


def finite_difference(values: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """Forward-difference derivative along the last axis.

    The last column repeats the one before it so the output keeps the input
    shape; downstream quadrature then treats the derivative as a curve on
    the same grid.
    """
    vals = np.asarray(values, dtype=np.float64)
    if vals.shape[-1] != grid.p:
        raise DataError("values and grid disagree on the number of points")
    dt = np.diff(grid.points)
    out = np.empty_like(vals)
    out[..., :-1] = np.diff(vals, axis=-1) / dt
    out[..., -1] = out[..., -2]
    return out


def _sniff_delimiter(line: str) -> str:
    return "\t" if "\t" in line else ","


def _parse_label(token: str, row: int) -> int:
    try:
        x = float(token)
    except ValueError:
        raise DataError(f"row {row}: label {token!r} is not numeric") from None
    if x != int(x):
        raise DataError(f"row {row}: label {token!r} is not an integer")
    return int(x)


def load_ucr(path) -> FunctionalDataset:
    """Read a UCR-style delimited file: label first, then p values per row.

    The delimiter (tab or comma) is sniffed from the first line. All rows
    must have the same length. Raw class labels are kept on the returned
    dataset so the caller can decide which classes count as anomalies; the
    grid is taken to be equispaced on [0, 1].

    Raises:
        DataError: empty file, ragged rows, or non-numeric cells, with the
            offending row (and column) named in the message.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise DataError(f"{path}: file is empty")
    delim = _sniff_delimiter(lines[0])
    labels = []
    rows = []
    width = None
    for i, ln in enumerate(lines, start=1):
        toks = ln.split(delim)
        if width is None:
            width = len(toks)
            if width < 3:
                raise DataError(f"row {i}: expected a label plus at least 2 values")
        elif len(toks) != width:
            raise DataError(f"row {i}: has {len(toks)} fields, expected {width}")
        labels.append(_parse_label(toks[0], i))
        try:
            rows.append([float(t) for t in toks[1:]])
        except ValueError:
            for j, t in enumerate(toks[1:], start=2):
                try:
                    float(t)
                except ValueError:
                    raise DataError(f"row {i}, column {j}: {t!r} is not numeric") from None
            raise
    values = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise DataError(f"row {bad[0] + 1}: non-finite value")
    return FunctionalDataset(
        grid=uniform_grid(values.shape[1]),
        values=values,
        class_labels=np.asarray(labels, dtype=np.int64),
    )


def save_dataset(dataset: FunctionalDataset, path) -> None:
    """Write the package's own CSV format; values round-trip exactly."""
    lab = dataset.class_labels
    if lab is None:
        lab = dataset.labels if dataset.labels is not None else np.zeros(dataset.n, dtype=np.int64)
    with open(path, "w", encoding="utf-8") as fh:
        if dataset.d > 1:
            fh.write(f"# channels: {dataset.d}\n")
        fh.write("# grid: " + ",".join(repr(float(t)) for t in dataset.grid.points) + "\n")
        flat = dataset.values.reshape(dataset.n, dataset.d * dataset.p)
        for i in range(dataset.n):
            fh.write(str(int(lab[i])) + "," + ",".join(repr(float(v)) for v in flat[i]) + "\n")


def load_dataset(path) -> FunctionalDataset:
    """Read a file written by save_dataset.

    Falls back to load_ucr when the ``# grid:`` header is missing, so every
    command that takes curve input accepts either format.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise DataError(f"{path}: file is empty")
    if not any(ln.startswith("# grid:") for ln in lines[:2]):
        return load_ucr(path)
    channels = 1
    grid = None
    body_start = 0
    for i, ln in enumerate(lines):
        if ln.startswith("# channels:"):
            channels = int(ln.split(":", 1)[1])
        elif ln.startswith("# grid:"):
            try:
                grid = TimeGrid(np.array([float(t) for t in ln.split(":", 1)[1].split(",")]))
            except ValueError:
                raise DataError(f"{path}: malformed grid header") from None
        else:
            body_start = i
            break
    else:
        raise DataError(f"{path}: no data rows")
    if grid is None:
        raise DataError(f"{path}: missing grid header")
    labels = []
    rows = []
    for i, ln in enumerate(lines[body_start:], start=body_start + 1):
        toks = ln.split(",")
        if len(toks) != 1 + channels * grid.p:
            raise DataError(f"row {i}: has {len(toks)} fields, expected {1 + channels * grid.p}")
        labels.append(_parse_label(toks[0], i))
        try:
            rows.append([float(t) for t in toks[1:]])
        except ValueError:
            raise DataError(f"row {i}: non-numeric value") from None
    values = np.asarray(rows, dtype=np.float64).reshape(len(rows), channels, grid.p)
    lab = np.asarray(labels, dtype=np.int64)
    binary = np.isin(lab, (0, 1)).all()
    return FunctionalDataset(
        grid=grid,
        values=values,
        labels=lab if binary else None,
        class_labels=lab,
    )
