"""Synthetic curve datasets used in tests, demos, and the benchmark CLI.

Every generator takes an explicit seed and is deterministic given it; most
randomness is confined to additive noise terms, with the smooth families
laid out by equispaced shape parameters.
"""

from __future__ import annotations

import numpy as np

from .data import FunctionalDataset, TimeGrid, uniform_grid
from .errors import ConfigError


def _hump(q: float | np.ndarray, t: np.ndarray) -> np.ndarray:
    """Smooth one-hump curve 30 (1-t)^q t^q; q steers height and width."""
    q = np.asarray(q, dtype=np.float64)
    return 30.0 * (1.0 - t) ** q[..., np.newaxis] * t ** q[..., np.newaxis]


def gen_cuevas105(seed: int, p: int = 100, jump: float = 2.0) -> FunctionalDataset:
    """One-hump family of 100 curves plus 5 structurally different anomalies.

    The normal block uses shape parameters equispaced in [1, 1.4]. The five
    appended anomalies are, in order: a level jump of ``jump`` after t = 0.7,
    a flatter hump (q = 1.6), an added slow sine, additive noise restricted
    to 0.2 <= t <= 0.8, and an added fast low-amplitude sine. Only the noise
    anomaly consumes randomness.

    Returns:
        Dataset of 105 labeled curves (last 5 marked anomalous).
    """
    rng = np.random.default_rng(seed)
    grid = uniform_grid(p)
    t = grid.points
    q_norm = np.linspace(1.0, 1.4, 100)
    normal = _hump(q_norm, t)
    base = _hump(1.2, t)
    noise = np.where((t >= 0.2) & (t <= 0.8), rng.normal(0.0, 0.3, size=p), 0.0)
    anomalies = np.stack(
        [
            base + jump * (t >= 0.7),
            _hump(1.6, t),
            base + np.sin(2.0 * np.pi * t),
            base + noise,
            base + 0.5 * np.sin(10.0 * np.pi * t),
        ]
    )
    values = np.vstack([normal, anomalies])
    labels = np.r_[np.zeros(100, dtype=np.int64), np.ones(5, dtype=np.int64)]
    return FunctionalDataset(grid=grid, values=values, labels=labels)


def gen_brownian_dataset(n: int, p: int, seed: int) -> FunctionalDataset:
    """n standard Brownian paths on a uniform grid: W(0) = 0, independent
    Gaussian increments with variance equal to the grid spacing."""
    if n < 1:
        raise ConfigError("n must be positive")
    rng = np.random.default_rng(seed)
    grid = uniform_grid(p)
    dt = np.diff(grid.points)
    steps = rng.standard_normal((n, p - 1)) * np.sqrt(dt)
    values = np.concatenate([np.zeros((n, 1)), np.cumsum(steps, axis=1)], axis=1)
    return FunctionalDataset(grid=grid, values=values)


def gen_noisy_contamination(seed: int, p: int = 100) -> FunctionalDataset:
    """90 smooth one-hump curves contaminated by 10 noisy copies.

    The contaminating curves share the q = 1.2 hump and each carries its own
    additive N(0, 0.3^2) noise on 0.2 <= t <= 0.8.
    """
    rng = np.random.default_rng(seed)
    grid = uniform_grid(p)
    t = grid.points
    normal = _hump(np.linspace(1.0, 1.4, 90), t)
    window = (t >= 0.2) & (t <= 0.8)
    noisy = _hump(1.2, t) + np.where(window, rng.normal(0.0, 0.3, size=(10, p)), 0.0)
    values = np.vstack([normal, noisy])
    labels = np.r_[np.zeros(90, dtype=np.int64), np.ones(10, dtype=np.int64)]
    return FunctionalDataset(grid=grid, values=values, labels=labels)


def gen_isolated_anomaly(seed: int, p: int = 100, shift: float = 2.0) -> FunctionalDataset:
    """30 rise-then-plateau curves plus one whose rise is shifted.

    Curves live on [0, 0.7]: a smooth rise 30 (1-t)^q t^q up to t = 0.2
    (q equispaced in [0.5, 0.55]), then a constant plateau at the t = 0.2
    level plus N(0, 0.3^2) noise. The anomaly takes the mid-family shape,
    offset by ``shift`` on the rise only, so its plateau sits deep inside
    the normal bundle and the anomalous part stays local.
    """
    rng = np.random.default_rng(seed)
    grid = TimeGrid(np.linspace(0.0, 0.7, p))
    t = grid.points
    rise = t <= 0.2
    q = np.linspace(0.5, 0.55, 30)

    def curve(qi: float, offset: float = 0.0) -> np.ndarray:
        plateau = 30.0 * 0.8**qi * 0.2**qi
        vals = np.where(rise, 30.0 * (1.0 - t) ** qi * t**qi, plateau)
        vals = vals + np.where(rise, 0.0, rng.normal(0.0, 0.3, size=p))
        return vals + offset * (t < 0.2)

    values = np.stack([curve(qi) for qi in q] + [curve(0.525, offset=shift)])
    labels = np.r_[np.zeros(30, dtype=np.int64), np.ones(1, dtype=np.int64)]
    return FunctionalDataset(grid=grid, values=values, labels=labels)


def gen_smooth(n: int = 100, p: int = 100, seed: int = 0) -> FunctionalDataset:
    """Amplitude-perturbed sine family: a_i sin(2 pi t), a_i ~ N(1, 0.2^2).

    Illustrative stand-in for a smooth-family benchmark; not used by any
    quantitative check in this package.
    """
    rng = np.random.default_rng(seed)
    grid = uniform_grid(p)
    amp = 1.0 + 0.2 * rng.standard_normal(n)
    values = amp[:, np.newaxis] * np.sin(2.0 * np.pi * grid.points)
    return FunctionalDataset(grid=grid, values=values)


#: Scaling factors behind brownian_probes: 1 is a typical path, then
#: increasingly extreme copies of the same path.
PROBE_FACTORS = (1.0, 2.0, 2.5, 4.0)


def brownian_probes(p: int = 100, seed: int = 12345) -> FunctionalDataset:
    """Four probe curves for stability studies on Brownian data.

    One seeded Brownian path is scaled by PROBE_FACTORS, giving a typical
    curve (x0), two anomalies (x1, x2), and an extreme anomaly (x3), in
    that row order. Labels mark rows 1..3 anomalous.
    """
    path = gen_brownian_dataset(1, p, seed).values[0, 0]
    values = np.stack([f * path for f in PROBE_FACTORS])
    labels = np.r_[np.zeros(1, dtype=np.int64), np.ones(3, dtype=np.int64)]
    return FunctionalDataset(grid=uniform_grid(p), values=values, labels=labels)


GENERATORS = {
    "cuevas105": lambda seed, p, n: gen_cuevas105(seed, p=p),
    "brownian": lambda seed, p, n: gen_brownian_dataset(n, p, seed),
    "noisy": lambda seed, p, n: gen_noisy_contamination(seed, p=p),
    "isolated": lambda seed, p, n: gen_isolated_anomaly(seed, p=p),
    "smooth": lambda seed, p, n: gen_smooth(n=n, p=p, seed=seed),
    "brownian-probes": lambda seed, p, n: brownian_probes(p=p, seed=seed),
}


def generate(name: str, seed: int, p: int = 100, n: int = 500) -> FunctionalDataset:
    """Dispatch by dataset name; see GENERATORS for the accepted names."""
    if name not in GENERATORS:
        raise ConfigError(f"unknown synthetic dataset {name!r}; choose from {sorted(GENERATORS)}")
    return GENERATORS[name](seed, p, n)
