"""Randomized isolation trees over projected data.

The growth loop is agnostic to what a "split" is: it asks a splitter object
to draw a split handle and to project a set of row indices through it, then
thresholds the projections at a uniformly drawn cut. Functional forests use
dictionary atoms as handles; the vector baselines use a coordinate index or
a unit direction. One engine, several front ends.

Per-node randomness, in draw order: the handle, then the cut. The cut is
redrawn while it would leave the ">" child empty (it can only land on the
maximum projection), up to MAX_CUT_DRAWS times, after which the node becomes
a leaf. Nodes whose projections are all equal within DEGENERATE_EPS become
leaves without a cut draw. The left subtree is grown before the right one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

EULER_GAMMA = 0.5772156649

#: Projections spanning no more than this are considered constant.
DEGENERATE_EPS = 1e-12

MAX_CUT_DRAWS = 8


def avg_bst_path(m: int) -> float:
    """Expected unsuccessful-search depth in a binary search tree of m keys.

    This is the classical isolation-forest normalizer: path lengths of
    points left unisolated in a size-m leaf are extended by this amount,
    and the forest score divides by its value at the subsample size.
    """
    if m <= 1:
        return 0.0
    if m == 2:
        return 1.0
    return 2.0 * (math.log(m - 1) + EULER_GAMMA) - 2.0 * (m - 1) / m


@dataclass
class Leaf:
    size: int
    depth: int


@dataclass
class Internal:
    split: object
    cut: float
    size: int
    left: "Leaf | Internal"
    right: "Leaf | Internal"


def grow(idx: np.ndarray, depth: int, rng: np.random.Generator, splitter,
         height_limit: int | None, min_leaf_size: int = 1):
    """Recursively isolate the rows in idx; returns the subtree root."""
    m = idx.size
    if m <= min_leaf_size or (height_limit is not None and depth >= height_limit):
        return Leaf(m, depth)
    handle = splitter.draw(rng)
    proj = splitter.project(idx, handle)
    lo = float(proj.min())
    hi = float(proj.max())
    if hi - lo <= DEGENERATE_EPS:
        return Leaf(m, depth)
    cut = None
    for _ in range(MAX_CUT_DRAWS):
        cand = rng.uniform(lo, hi)
        if cand < hi:
            cut = float(cand)
            break
    if cut is None:
        return Leaf(m, depth)
    mask = proj <= cut
    left = grow(idx[mask], depth + 1, rng, splitter, height_limit, min_leaf_size)
    right = grow(idx[~mask], depth + 1, rng, splitter, height_limit, min_leaf_size)
    return Internal(handle, cut, m, left, right)


@dataclass
class FITree:
    """One fitted isolation tree plus the sizes its scores depend on."""

    root: Leaf | Internal
    psi: int
    height_limit: int | None


def path_lengths(root, projector, n_queries: int) -> np.ndarray:
    """Adjusted path length of every query row through one tree.

    ``projector(qidx, handle)`` must return the queries' projections under
    the node's split handle. Leaf depths are extended by avg_bst_path of
    the leaf size, so unisolated points are charged their expected
    remaining depth.
    """
    out = np.empty(n_queries)
    stack = [(root, np.arange(n_queries, dtype=np.intp))]
    while stack:
        node, qidx = stack.pop()
        if qidx.size == 0:
            continue
        if isinstance(node, Leaf):
            out[qidx] = node.depth + avg_bst_path(node.size)
            continue
        proj = projector(qidx, node.split)
        mask = proj <= node.cut
        stack.append((node.left, qidx[mask]))
        stack.append((node.right, qidx[~mask]))
    return out


def path_length(root, projector_one) -> float:
    """Adjusted path length of a single query.

    ``projector_one(handle)`` returns the query's projection under one
    split handle.
    """
    node = root
    depth = 0
    while isinstance(node, Internal):
        node = node.left if projector_one(node.split) <= node.cut else node.right
        depth += 1
    return depth + avg_bst_path(node.size)


def count_nodes(root) -> tuple[int, int]:
    """(internal, leaf) counts of the subtree."""
    if isinstance(root, Leaf):
        return 0, 1
    il, ll = count_nodes(root.left)
    ir, lr = count_nodes(root.right)
    return il + ir + 1, ll + lr


def tree_height(root) -> int:
    if isinstance(root, Leaf):
        return root.depth
    return max(tree_height(root.left), tree_height(root.right))


def validate_height_limit(height_limit) -> int | None:
    if height_limit is None:
        return None
    if not isinstance(height_limit, (int, np.integer)) or height_limit < 0:
        raise ConfigError("height_limit must be a non-negative int or None")
    return int(height_limit)
