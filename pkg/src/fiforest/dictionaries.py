"""Projection dictionaries: families of atoms that curves are projected onto.

An atom is itself a curve on the data grid. Families fall into three groups:

* parametric, effectively infinite: cosine, mexican_hat, gaussian_wavelet,
  uniform_indicator(_deriv), sinuscosine2d, and the stochastic brownian /
  brownian_bridge. These can either be sampled fresh at every split or
  materialized once into a finite atom table (``size`` entries).
* enumerable: dyadic_indicator(_deriv) enumerate all cells of levels
  1..levels, and ``fixed`` is a single caller-supplied atom.
* data-bound: ``self`` draws atoms from a pool of training curves and
  ``local_self`` multiplies a pool curve by a random indicator window.
  The pool is supplied by the caller (the forest binds each tree's
  subsample), so these never materialize at the forest level.

Sampling draw order is part of each family's contract and is spelled out
in the sampler docstrings; reproducibility of fitted models depends on it.

``size`` on a spec is "auto" (materialize DEFAULT_SIZE atoms when the
family is parametric), an int (materialize that many), or None (sample
fresh at each split).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import TimeGrid
from .errors import ConfigError

DEFAULT_SIZE = 1000

#: Attempts allowed when rejection-sampling an indicator window.
MAX_WINDOW_DRAWS = 100

FAMILIES = (
    "self",
    "local_self",
    "brownian",
    "brownian_bridge",
    "cosine",
    "mexican_hat",
    "gaussian_wavelet",
    "dyadic_indicator",
    "dyadic_indicator_deriv",
    "uniform_indicator",
    "uniform_indicator_deriv",
    "sinuscosine2d",
    "mixture",
    "fixed",
)

ENUMERABLE = ("dyadic_indicator", "dyadic_indicator_deriv", "fixed")
DATA_BOUND = ("self", "local_self")

#: Families whose atoms can be rebuilt exactly from provenance parameters.
REEVALUABLE = (
    "cosine",
    "mexican_hat",
    "gaussian_wavelet",
    "dyadic_indicator",
    "dyadic_indicator_deriv",
    "uniform_indicator",
    "uniform_indicator_deriv",
    "sinuscosine2d",
)


@dataclass(frozen=True, eq=False)
class Atom:
    """One dictionary element: (d, p) values plus how it was produced."""

    values: np.ndarray
    provenance: dict

    def __post_init__(self):
        object.__setattr__(self, "values", np.atleast_2d(np.asarray(self.values, dtype=np.float64)))


@dataclass(frozen=True, eq=False)
class Pool:
    """Curves a data-bound family draws from, with their original row ids."""

    values: np.ndarray  # (m, d, p)
    indices: np.ndarray  # (m,)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class DictionarySpec:
    """Configuration of one dictionary family.

    Range fields only apply to the families that read them; unused ones are
    ignored. ``levels`` (dyadic families) may be left None and is resolved
    to ceil(log2(p)) against the data grid at fit time.
    """

    family: str
    size: int | str | None = "auto"
    levels: int | None = None
    amp_range: tuple[float, float] = (0.0, 1.0)
    freq_range: tuple[float, float] = (0.0, 10.0)
    center_range: tuple[float, float] | None = None
    width_range: tuple[float, float] = (0.04, 0.2)
    variance_range: tuple[float, float] = (0.2, 1.0)
    components: tuple = ()
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown dictionary family {self.family!r}")
        if self.center_range is None:
            default = (-4.0, 4.0) if self.family == "gaussian_wavelet" else (-0.8, 0.8)
            object.__setattr__(self, "center_range", default)
        if isinstance(self.size, str) and self.size != "auto":
            raise ConfigError(f"size must be an int, null, or 'auto', got {self.size!r}")
        if isinstance(self.size, int) and self.size < 1:
            raise ConfigError("dictionary size must be positive")
        if self.levels is not None and self.levels < 1:
            raise ConfigError("levels must be >= 1")
        if self.family == "mixture":
            if not self.components:
                raise ConfigError("mixture needs at least one component")
            total = sum(w for _, w in self.components)
            if any(w <= 0 for _, w in self.components) or abs(total - 1.0) > 1e-9:
                raise ConfigError("mixture weights must be positive and sum to 1")
        if self.family == "fixed":
            if self.values is None:
                raise ConfigError("fixed dictionary needs explicit atom values")
            object.__setattr__(
                self, "values", np.atleast_2d(np.asarray(self.values, dtype=np.float64))
            )
        for name in ("amp_range", "freq_range", "center_range", "width_range", "variance_range"):
            lo, hi = getattr(self, name)
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise ConfigError(f"{name} must be a finite (lo, hi) pair with lo <= hi")

    def to_dict(self) -> dict:
        d = {"family": self.family, "size": self.size}
        if self.family in ("dyadic_indicator", "dyadic_indicator_deriv"):
            d["levels"] = self.levels
        if self.family in ("cosine", "sinuscosine2d"):
            d["amp_range"] = list(self.amp_range)
            d["freq_range"] = list(self.freq_range)
        if self.family == "mexican_hat":
            d["center_range"] = list(self.center_range)
            d["width_range"] = list(self.width_range)
        if self.family == "gaussian_wavelet":
            d["center_range"] = list(self.center_range)
            d["variance_range"] = list(self.variance_range)
        if self.family == "mixture":
            d["components"] = [
                dict(spec.to_dict(), weight=w) for spec, w in self.components
            ]
        if self.family == "fixed":
            d["values"] = self.values.tolist()
        return d


_SPEC_KEYS = {
    "family", "size", "levels", "amp_range", "freq_range", "center_range",
    "width_range", "variance_range", "components", "values", "weight",
}


def spec_from_obj(obj) -> DictionarySpec:
    """Accept a DictionarySpec, a family-name string, or a config dict."""
    if isinstance(obj, DictionarySpec):
        return obj
    if isinstance(obj, str):
        return DictionarySpec(family=obj)
    if not isinstance(obj, dict):
        raise ConfigError(f"cannot interpret dictionary spec {obj!r}")
    unknown = set(obj) - _SPEC_KEYS
    if unknown:
        raise ConfigError(f"unknown dictionary keys: {sorted(unknown)}")
    if "family" not in obj:
        raise ConfigError("dictionary spec needs a 'family' key")
    kw = dict(obj)
    kw.pop("weight", None)
    for name in ("amp_range", "freq_range", "center_range", "width_range", "variance_range"):
        if name in kw and kw[name] is not None:
            kw[name] = tuple(kw[name])
    if "components" in kw and kw["components"]:
        comps = []
        for c in kw["components"]:
            if "weight" not in c:
                raise ConfigError("each mixture component needs a 'weight'")
            comps.append((spec_from_obj(c), float(c["weight"])))
        kw["components"] = tuple(comps)
    if "values" in kw and kw["values"] is not None:
        kw["values"] = np.asarray(kw["values"], dtype=np.float64)
    return DictionarySpec(**kw)


def resolved_levels(spec: DictionarySpec, p: int) -> int:
    """Dyadic depth to use: the configured one, else ceil(log2(p))."""
    if spec.levels is not None:
        return spec.levels
    return max(1, math.ceil(math.log2(p)))


def contains_data_bound(spec: DictionarySpec) -> bool:
    """True when sampling draws atoms from the training curves, directly or
    through a mixture component; such specs need a per-tree pool."""
    if spec.family in DATA_BOUND:
        return True
    return any(contains_data_bound(sub) for sub, _ in spec.components)


def dyadic_cell_count(levels: int) -> int:
    """Cells over levels 1..levels: sum of 2^j, which telescopes."""
    return 2 ** (levels + 1) - 2


def _decode_dyadic(index: int) -> tuple[int, int]:
    """Map a flat level-major index to (level, cell)."""
    level = int(math.floor(math.log2(index + 2)))
    return level, index + 2 - 2**level


# ---------------------------------------------------------------------------
# Single-channel samplers. Each returns (values, params) and documents its
# RNG draw order, which loaders and oracles rely on.
# ---------------------------------------------------------------------------


def _draw_cosine(spec, t, rng):
    """Draws: amplitude, then frequency."""
    a = float(rng.uniform(*spec.amp_range))
    om = float(rng.uniform(*spec.freq_range))
    return a * np.cos(2.0 * np.pi * om * t), {"a": a, "omega": om}


def _brownian_path(t, rng):
    """Draws: p-1 standard normals, scaled to the grid increments."""
    steps = rng.standard_normal(t.size - 1) * np.sqrt(np.diff(t))
    return np.concatenate([[0.0], np.cumsum(steps)])


def _draw_brownian(spec, t, rng):
    return _brownian_path(t, rng), {}


def _draw_brownian_bridge(spec, t, rng):
    """Brownian path pinned to 0 at both ends of the grid span."""
    w = _brownian_path(t, rng)
    frac = (t - t[0]) / (t[-1] - t[0])
    return w - frac * w[-1], {}


def _draw_mexican_hat(spec, t, rng):
    """Draws: center, then width."""
    theta = float(rng.uniform(*spec.center_range))
    sigma = float(rng.uniform(*spec.width_range))
    z = (t - theta) / sigma
    vals = (2.0 / (np.sqrt(3.0 * sigma) * np.pi**0.25)) * (1.0 - z**2) * np.exp(-0.5 * z**2)
    return vals, {"center": theta, "width": sigma}


def _draw_gaussian_wavelet(spec, t, rng):
    """Draws: variance, then center.

    The atom is the negated second derivative of a Gaussian density with
    the drawn variance, centered at the drawn location.
    """
    var = float(rng.uniform(*spec.variance_range))
    theta = float(rng.uniform(*spec.center_range))
    return _gaussian_wavelet_values(t, var, theta), {"variance": var, "center": theta}


def _gaussian_wavelet_values(t, var, theta):
    pdf = np.exp(-0.5 * (t - theta) ** 2 / var) / np.sqrt(2.0 * np.pi * var)
    return (var - (t - theta) ** 2) / var**2 * pdf


def _draw_window(t, rng):
    """Rejection-sample [lo, hi] from two U[0, 1] draws per attempt until
    the window contains a grid point."""
    for _ in range(MAX_WINDOW_DRAWS):
        a = float(rng.uniform(0.0, 1.0))
        b = float(rng.uniform(0.0, 1.0))
        lo, hi = (a, b) if a <= b else (b, a)
        mask = (t >= lo) & (t <= hi)
        if mask.any():
            return mask, lo, hi
    raise RuntimeError(f"no grid point fell inside the window after {MAX_WINDOW_DRAWS} draws")


def _draw_uniform_indicator(spec, t, rng):
    mask, lo, hi = _draw_window(t, rng)
    return mask.astype(np.float64), {"lo": lo, "hi": hi}


def _draw_uniform_indicator_deriv(spec, t, rng):
    mask, lo, hi = _draw_window(t, rng)
    return t * mask, {"lo": lo, "hi": hi}


def _dyadic_values(t, level, cell, deriv):
    lo = cell / 2**level
    hi = (cell + 1) / 2**level
    mask = (t >= lo) & (t <= hi)
    return (t * mask) if deriv else mask.astype(np.float64)


def _draw_dyadic(spec, t, rng, deriv):
    """Draws: one flat cell index over the level-major enumeration."""
    levels = resolved_levels(spec, t.size)
    index = int(rng.integers(0, dyadic_cell_count(levels)))
    level, cell = _decode_dyadic(index)
    return _dyadic_values(t, level, cell, deriv), {"level": level, "cell": cell}


_CHANNEL_SAMPLERS = {
    "cosine": _draw_cosine,
    "brownian": _draw_brownian,
    "brownian_bridge": _draw_brownian_bridge,
    "mexican_hat": _draw_mexican_hat,
    "gaussian_wavelet": _draw_gaussian_wavelet,
    "uniform_indicator": _draw_uniform_indicator,
    "uniform_indicator_deriv": _draw_uniform_indicator_deriv,
    "dyadic_indicator": lambda spec, t, rng: _draw_dyadic(spec, t, rng, False),
    "dyadic_indicator_deriv": lambda spec, t, rng: _draw_dyadic(spec, t, rng, True),
}


def sample_atom(spec: DictionarySpec, grid: TimeGrid, rng: np.random.Generator,
                pool: Pool | None = None, n_channels: int = 1) -> Atom:
    """Draw one atom from the family.

    Multichannel atoms from single-channel families draw channel 0 first,
    then channel 1, and so on. Data-bound families require ``pool``.

    Draw orders per family (all from the one generator passed in):
      self: one integer pool index.
      local_self: pool index, then window attempts (two uniforms each).
      sinuscosine2d, per channel: sin/cos choice (integer), amplitude,
        frequency.
      mixture: one uniform to pick the component, then that component's
        own draws.
    """
    t = grid.points
    fam = spec.family
    if fam == "fixed":
        if spec.values.shape[-1] != grid.p:
            raise ConfigError("fixed atom length does not match the grid")
        return Atom(spec.values, {"family": "fixed"})
    if fam in DATA_BOUND:
        if pool is None:
            raise ConfigError(f"{fam} dictionary needs a pool of curves")
        i = int(rng.integers(0, pool.n))
        prov = {"family": fam, "train_index": int(pool.indices[i])}
        vals = pool.values[i]
        if fam == "local_self":
            mask, lo, hi = _draw_window(t, rng)
            vals = vals * mask
            prov.update(lo=lo, hi=hi)
        return Atom(vals, prov)
    if fam == "sinuscosine2d":
        chans, params = [], []
        for _ in range(n_channels):
            use_sin = int(rng.integers(0, 2))
            a = float(rng.uniform(*spec.amp_range))
            om = float(rng.uniform(*spec.freq_range))
            phase = np.sin if use_sin else np.cos
            chans.append(a * phase(2.0 * np.pi * om * t))
            params.append({"kind": "sin" if use_sin else "cos", "a": a, "omega": om})
        return Atom(np.stack(chans), {"family": fam, "channels": params})
    if fam == "mixture":
        u = rng.uniform(0.0, 1.0)
        acc = 0.0
        chosen = len(spec.components) - 1
        for k, (_, wgt) in enumerate(spec.components):
            acc += wgt
            if u < acc:
                chosen = k
                break
        sub = sample_atom(spec.components[chosen][0], grid, rng, pool, n_channels)
        prov = dict(sub.provenance)
        prov["component"] = chosen
        return Atom(sub.values, prov)
    sampler = _CHANNEL_SAMPLERS[fam]
    if n_channels == 1:
        vals, params = sampler(spec, t, rng)
        return Atom(vals, {"family": fam, **params})
    chans, params = [], []
    for _ in range(n_channels):
        vals, par = sampler(spec, t, rng)
        chans.append(vals)
        params.append(par)
    return Atom(np.stack(chans), {"family": fam, "channels": params})


def enumerate_atoms(spec: DictionarySpec, grid: TimeGrid, pool: Pool | None = None) -> list[Atom]:
    """Full listing of an enumerable or data-bound family, in canonical order.

    Dyadic cells come level-major (level 1 first, cells left to right);
    pool listings follow pool order.
    """
    t = grid.points
    fam = spec.family
    if fam in ("dyadic_indicator", "dyadic_indicator_deriv"):
        deriv = fam.endswith("deriv")
        levels = resolved_levels(spec, grid.p)
        out = []
        for level in range(1, levels + 1):
            for cell in range(2**level):
                out.append(
                    Atom(
                        _dyadic_values(t, level, cell, deriv),
                        {"family": fam, "level": level, "cell": cell},
                    )
                )
        return out
    if fam == "fixed":
        return [Atom(spec.values, {"family": "fixed"})]
    if fam == "self":
        if pool is None:
            raise ConfigError("self dictionary needs a pool of curves")
        return [
            Atom(pool.values[i], {"family": "self", "train_index": int(pool.indices[i])})
            for i in range(pool.n)
        ]
    raise ConfigError(f"{fam} dictionary cannot be enumerated")


def materialize(spec: DictionarySpec, grid: TimeGrid, rng: np.random.Generator,
                pool: Pool | None = None, n_channels: int = 1) -> list[Atom]:
    """Finite atom table for the family.

    Enumerable and self families return their full enumeration, ignoring
    ``size``. Parametric families draw ``size`` atoms i.i.d. (the "auto"
    sentinel means DEFAULT_SIZE) and tag each with its table index.
    """
    fam = spec.family
    if fam in ENUMERABLE or fam == "self":
        atoms = enumerate_atoms(spec, grid, pool)
    else:
        if fam == "local_self":
            raise ConfigError("local_self is bound to per-tree pools and cannot be materialized")
        size = DEFAULT_SIZE if spec.size == "auto" else spec.size
        if size is None:
            raise ConfigError(f"cannot materialize {fam} without a size")
        atoms = [sample_atom(spec, grid, rng, pool, n_channels) for _ in range(size)]
    for i, atom in enumerate(atoms):
        atom.provenance.setdefault("index", i)
    return atoms


def evaluate_provenance(prov: dict, grid: TimeGrid, n_channels: int = 1) -> np.ndarray:
    """Rebuild atom values from stored parameters (REEVALUABLE families)."""
    t = grid.points
    fam = prov.get("family")

    def one(par: dict) -> np.ndarray:
        if fam == "cosine":
            return par["a"] * np.cos(2.0 * np.pi * par["omega"] * t)
        if fam == "mexican_hat":
            z = (t - par["center"]) / par["width"]
            return (
                (2.0 / (np.sqrt(3.0 * par["width"]) * np.pi**0.25))
                * (1.0 - z**2)
                * np.exp(-0.5 * z**2)
            )
        if fam == "gaussian_wavelet":
            return _gaussian_wavelet_values(t, par["variance"], par["center"])
        if fam in ("dyadic_indicator", "dyadic_indicator_deriv"):
            return _dyadic_values(t, par["level"], par["cell"], fam.endswith("deriv"))
        if fam in ("uniform_indicator", "uniform_indicator_deriv"):
            mask = (t >= par["lo"]) & (t <= par["hi"])
            return (t * mask) if fam.endswith("deriv") else mask.astype(np.float64)
        if fam == "sinuscosine2d":
            phase = np.sin if par["kind"] == "sin" else np.cos
            return par["a"] * phase(2.0 * np.pi * par["omega"] * t)
        raise ConfigError(f"cannot re-evaluate atoms of family {fam!r}")

    if "channels" in prov:
        return np.stack([one(par) for par in prov["channels"]])
    vals = one(prov)
    return np.tile(vals, (n_channels, 1)) if n_channels > 1 else np.atleast_2d(vals)
