"""Inner products between curves, and the vectorized projection engine.

All integrals use the composite trapezoid rule on the observed grid, which
is exact for integrands that are piecewise linear between grid points.
Three univariate products are available:

* ``l2``: plain integral of f * g.
* ``deriv``: integral of f' * g', with f' the forward finite difference.
* ``combined``: alpha * <f,g> / (|f| |g|) + (1 - alpha) * <f',g'> / (|f'| |g'|),
  each term dropped to 0 when its norm product falls below 1e-12.

Multichannel curves use the sum of per-channel products, with one product
spec per channel.

The per-pair functions are the readable reference forms. Forest fitting
and scoring go through CurvePack / projection functions, which precompute
weighted values, derivatives, and norms once per dataset so that a node's
projections reduce to one small matrix product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import TimeGrid, finite_difference
from .errors import ConfigError

#: Normalizing products below this are treated as zero (their term drops out).
NORM_EPS = 1e-12

KINDS = ("l2", "deriv", "combined")


@dataclass(frozen=True)
class InnerProductSpec:
    """Choice of curve inner product; alpha only matters for ``combined``."""

    kind: str = "l2"
    alpha: float = 0.5

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown inner product {self.kind!r}; choose from {KINDS}")
        if self.kind == "combined" and not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha must lie in [0, 1]")

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "combined":
            d["alpha"] = float(self.alpha)
        return d


def spec_from_obj(obj) -> InnerProductSpec:
    """Accept an InnerProductSpec, a kind string, or a {kind, alpha} dict."""
    if isinstance(obj, InnerProductSpec):
        return obj
    if isinstance(obj, str):
        return InnerProductSpec(kind=obj)
    if isinstance(obj, dict):
        unknown = set(obj) - {"kind", "alpha"}
        if unknown:
            raise ConfigError(f"unknown inner product keys: {sorted(unknown)}")
        return InnerProductSpec(**obj)
    raise ConfigError(f"cannot interpret inner product spec {obj!r}")


def channel_specs(obj, n_channels: int) -> tuple[InnerProductSpec, ...]:
    """Normalize to one spec per channel, broadcasting a single spec."""
    if isinstance(obj, (list, tuple)) and not isinstance(obj, InnerProductSpec):
        specs = tuple(spec_from_obj(o) for o in obj)
        if len(specs) != n_channels:
            raise ConfigError(f"got {len(specs)} inner products for {n_channels} channel(s)")
        return specs
    return (spec_from_obj(obj),) * n_channels


def trapezoid_weights(grid: TimeGrid) -> np.ndarray:
    """Quadrature weights w with sum(w * h) the trapezoid integral of h."""
    dt = np.diff(grid.points)
    w = np.zeros(grid.p)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def l2_inner(f, g, grid: TimeGrid) -> float:
    """Trapezoid approximation of the integral of f * g over the grid span."""
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if f.shape != (grid.p,) or g.shape != (grid.p,):
        raise ConfigError("l2_inner expects two curves sampled on the given grid")
    return float((f * g) @ trapezoid_weights(grid))


def l2_norm(f, grid: TimeGrid) -> float:
    return float(np.sqrt(l2_inner(f, f, grid)))


def deriv_inner(f, g, grid: TimeGrid) -> float:
    """l2_inner of the forward-difference derivatives of f and g."""
    df = finite_difference(np.asarray(f, dtype=np.float64), grid)
    dg = finite_difference(np.asarray(g, dtype=np.float64), grid)
    return l2_inner(df, dg, grid)


def combined_inner(f, g, grid: TimeGrid, alpha: float = 0.5) -> float:
    """Blend of normalized value and derivative products.

    Each term is the plain product divided by the corresponding norm
    product; a term whose norm product is below NORM_EPS contributes 0,
    so constant curves are handled without special cases upstream.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError("alpha must lie in [0, 1]")
    raw = l2_inner(f, g, grid)
    denom = l2_norm(f, grid) * l2_norm(g, grid)
    value_term = 0.0 if denom < NORM_EPS else raw / denom
    df = finite_difference(np.asarray(f, dtype=np.float64), grid)
    dg = finite_difference(np.asarray(g, dtype=np.float64), grid)
    raw_d = l2_inner(df, dg, grid)
    denom_d = l2_norm(df, grid) * l2_norm(dg, grid)
    deriv_term = 0.0 if denom_d < NORM_EPS else raw_d / denom_d
    return alpha * value_term + (1.0 - alpha) * deriv_term


def pair_inner(f, g, grid: TimeGrid, spec: InnerProductSpec) -> float:
    if spec.kind == "l2":
        return l2_inner(f, g, grid)
    if spec.kind == "deriv":
        return deriv_inner(f, g, grid)
    return combined_inner(f, g, grid, spec.alpha)


def mv_inner(f, g, grid: TimeGrid, specs) -> float:
    """Sum of per-channel inner products for (d, p) curves f and g."""
    f = np.atleast_2d(np.asarray(f, dtype=np.float64))
    g = np.atleast_2d(np.asarray(g, dtype=np.float64))
    if f.shape != g.shape:
        raise ConfigError("mv_inner expects curves with matching shape")
    specs = channel_specs(specs, f.shape[0])
    return sum(pair_inner(f[c], g[c], grid, specs[c]) for c in range(f.shape[0]))


class CurvePack:
    """Per-dataset precomputation shared by every projection.

    Holds the raw values, forward-difference derivatives, and per-channel
    norms of a (n, d, p) value block, plus the quadrature weights. Atoms
    are curves too, so atom sets reuse this class.
    """

    def __init__(self, values: np.ndarray, grid: TimeGrid):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 2:
            values = values[:, np.newaxis, :]
        self.grid = grid
        self.w = trapezoid_weights(grid)
        self.values = values
        self.derivs = finite_difference(values, grid)
        self.norms = np.sqrt(np.einsum("ncp,p,ncp->nc", values, self.w, values))
        self.dnorms = np.sqrt(np.einsum("ncp,p,ncp->nc", self.derivs, self.w, self.derivs))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def _guarded(raw: np.ndarray, denom: np.ndarray) -> np.ndarray:
    ok = denom >= NORM_EPS
    return np.where(ok, raw / np.where(ok, denom, 1.0), 0.0)


def project_onto_atom(pack: CurvePack, idx: np.ndarray, atom_values: np.ndarray,
                      specs: tuple[InnerProductSpec, ...]) -> np.ndarray:
    """Inner products of the selected curves with one (d, p) atom."""
    av = np.atleast_2d(atom_values)
    ad = finite_difference(av, pack.grid)
    out = np.zeros(len(idx))
    for c, spec in enumerate(specs):
        wg = pack.w * av[c]
        wgd = pack.w * ad[c]
        if spec.kind == "l2":
            out += pack.values[idx, c] @ wg
        elif spec.kind == "deriv":
            out += pack.derivs[idx, c] @ wgd
        else:
            na = np.sqrt((av[c] * av[c]) @ pack.w)
            nad = np.sqrt((ad[c] * ad[c]) @ pack.w)
            out += spec.alpha * _guarded(pack.values[idx, c] @ wg, pack.norms[idx, c] * na)
            out += (1.0 - spec.alpha) * _guarded(
                pack.derivs[idx, c] @ wgd, pack.dnorms[idx, c] * nad
            )
    return out


def projection_table(curves: CurvePack, atoms: CurvePack,
                     specs: tuple[InnerProductSpec, ...]) -> np.ndarray:
    """All pairwise projections as an (n_curves, n_atoms) table.

    Used when the dictionary is a finite atom list: fitting and scoring
    then index into this table instead of projecting per node.
    """
    if curves.d != atoms.d:
        raise ConfigError("curves and atoms disagree on channel count")
    out = np.zeros((curves.n, atoms.n))
    for c, spec in enumerate(specs):
        if spec.kind == "l2":
            out += curves.values[:, c] @ (atoms.values[:, c] * curves.w).T
        elif spec.kind == "deriv":
            out += curves.derivs[:, c] @ (atoms.derivs[:, c] * curves.w).T
        else:
            raw = curves.values[:, c] @ (atoms.values[:, c] * curves.w).T
            raw_d = curves.derivs[:, c] @ (atoms.derivs[:, c] * curves.w).T
            out += spec.alpha * _guarded(raw, np.outer(curves.norms[:, c], atoms.norms[:, c]))
            out += (1.0 - spec.alpha) * _guarded(
                raw_d, np.outer(curves.dnorms[:, c], atoms.dnorms[:, c])
            )
    return out
