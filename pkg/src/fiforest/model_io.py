"""Save and load fitted forests as JSON.

The file is self-contained: grid, resolved config, the atom table or
per-node atom records, every cut value, and all leaf sizes, which is
enough to re-evaluate projections on the stored grid and reproduce scores
exactly. Trees are stored as flat preorder node lists (internal node, then
its left subtree, then its right subtree), and atoms of re-evaluable
parametric families store parameters instead of values to keep files
small. Serialization is canonical (sorted keys, fixed separators), so
fitting twice with the same config and seed writes identical bytes.

The ``threads`` setting is intentionally not stored: it changes how work
is scheduled, never what is computed.
"""

from __future__ import annotations

import json

import numpy as np

from .baseline import IFForest
from .data import TimeGrid
from .dictionaries import REEVALUABLE, Atom, evaluate_provenance
from .errors import ConfigError, DataError
from .forest import FIForest, ForestConfig
from .products import CurvePack, channel_specs
from .tree import DEGENERATE_EPS, MAX_CUT_DRAWS, FITree, Internal, Leaf

FORMAT = "fif-forest/1"

DECISIONS = {
    "cut_redraws": MAX_CUT_DRAWS,
    "degenerate_eps": DEGENERATE_EPS,
    "subsample": "without_replacement",
    "leaf_adjustment": "avg_bst_path",
}


def _atom_record(atom: Atom) -> dict:
    rec = dict(atom.provenance)
    if rec.get("family") not in REEVALUABLE:
        rec["values"] = atom.values.tolist()
    return rec


def _atom_from_record(rec: dict, grid: TimeGrid, channels: int) -> Atom:
    prov = {k: v for k, v in rec.items() if k != "values"}
    if "values" in rec:
        values = np.asarray(rec["values"], dtype=np.float64)
    else:
        values = evaluate_provenance(prov, grid, channels)
    return Atom(values=values, provenance=prov)


def _encode_split(handle, forest) -> dict:
    tag, payload = handle
    if tag == "table":
        return {"atom_index": payload}
    if tag == "coord":
        return {"coord": payload}
    if tag == "dir":
        return {"dir": [float(v) for v in payload]}
    if tag == "train":
        if forest.train_pack is None:
            raise ConfigError("cannot serialize self-dictionary splits without training curves")
        return {
            "family": "self",
            "train_index": payload,
            "values": forest.train_pack.values[payload].tolist(),
        }
    return _atom_record(payload)


def _decode_split(rec: dict, grid: TimeGrid | None, channels: int):
    if "atom_index" in rec:
        return ("table", int(rec["atom_index"]))
    if "coord" in rec:
        return ("coord", int(rec["coord"]))
    if "dir" in rec:
        return ("dir", np.asarray(rec["dir"], dtype=np.float64))
    return ("atom", _atom_from_record(rec, grid, channels))


def _flatten_tree(root, forest) -> list[dict]:
    out = []

    def visit(node):
        if isinstance(node, Leaf):
            out.append({"size": node.size, "depth": node.depth})
            return
        out.append({"cut": node.cut, "size": node.size,
                    "split": _encode_split(node.split, forest)})
        visit(node.left)
        visit(node.right)

    visit(root)
    return out


def _rebuild_tree(records: list[dict], grid: TimeGrid | None, channels: int):
    it = iter(records)

    def build(depth: int):
        rec = next(it)
        if "cut" not in rec:
            if rec["depth"] != depth:
                raise DataError("model file: leaf depth disagrees with tree structure")
            return Leaf(size=rec["size"], depth=depth)
        split = _decode_split(rec["split"], grid, channels)
        left = build(depth + 1)
        right = build(depth + 1)
        return Internal(split=split, cut=rec["cut"], size=rec["size"], left=left, right=right)

    root = build(0)
    if next(it, None) is not None:
        raise DataError("model file: trailing nodes after tree end")
    return root


def _config_record(forest) -> dict:
    cfg = forest.config
    is_fif = isinstance(forest, FIForest)
    return {
        "seed": int(cfg.seed),
        "n_trees": forest.n_trees,
        "psi": forest.psi,
        "height_limit": forest.height_limit,
        "min_leaf_size": cfg.min_leaf_size,
        "dictionary": cfg.dictionary.to_dict() if is_fif else None,
        "inner_product": [s.to_dict() for s in forest.specs] if is_fif else None,
    }


def save_model(forest, path) -> None:
    """Write a fitted FIForest or IFForest; see the module docstring."""
    if isinstance(forest, FIForest):
        mode = "fif"
        grid = forest.grid.points.tolist()
        channels = forest.channels
        atoms = None if forest.atoms is None else [_atom_record(a) for a in forest.atoms]
    elif isinstance(forest, IFForest):
        mode = f"if_{forest.mode}"
        grid = None
        channels = forest.d
        atoms = None
    else:
        raise ConfigError(f"cannot serialize {type(forest).__name__}")
    doc = {
        "format": FORMAT,
        "mode": mode,
        "config": _config_record(forest),
        "decisions": DECISIONS,
        "grid": grid,
        "channels": channels,
        "n_train": forest.n_train,
        "c_psi": forest.c_psi,
        "atoms": atoms,
        "trees": [_flatten_tree(t.root, forest) for t in forest.trees],
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, sort_keys=True, separators=(",", ":")))
        fh.write("\n")


def load_model(path):
    """Rebuild a forest saved by save_model.

    Functional forests come back ready to score; self-dictionary splits
    were stored with their atom values, so the training set is not needed.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not a valid model file ({exc})") from None
    if doc.get("format") != FORMAT:
        raise DataError(f"{path}: unsupported model format {doc.get('format')!r}")
    mode = doc["mode"]
    cfg_rec = doc["config"]
    channels = doc["channels"]
    if mode == "fif":
        grid = TimeGrid(np.asarray(doc["grid"], dtype=np.float64))
        config = ForestConfig(
            seed=cfg_rec["seed"],
            n_trees=cfg_rec["n_trees"],
            psi=cfg_rec["psi"],
            height_limit=cfg_rec["height_limit"],
            min_leaf_size=cfg_rec["min_leaf_size"],
            dictionary=cfg_rec["dictionary"],
            inner_product=cfg_rec["inner_product"],
        )
        specs = channel_specs(cfg_rec["inner_product"], channels)
        atoms = None
        atom_pack = None
        if doc["atoms"] is not None:
            atoms = [_atom_from_record(rec, grid, channels) for rec in doc["atoms"]]
            atom_pack = CurvePack(np.stack([a.values for a in atoms]), grid)
        trees = [
            FITree(_rebuild_tree(recs, grid, channels), cfg_rec["psi"], cfg_rec["height_limit"])
            for recs in doc["trees"]
        ]
        return FIForest(
            config=config,
            grid=grid,
            channels=channels,
            n_train=doc["n_train"],
            psi=cfg_rec["psi"],
            height_limit=cfg_rec["height_limit"],
            specs=specs,
            trees=trees,
            c_psi=doc["c_psi"],
            atoms=atoms,
            atom_pack=atom_pack,
            train_pack=None,
        )
    if mode in ("if_axis", "if_extended"):
        config = ForestConfig(
            seed=cfg_rec["seed"],
            n_trees=cfg_rec["n_trees"],
            psi=cfg_rec["psi"],
            height_limit=cfg_rec["height_limit"],
            min_leaf_size=cfg_rec["min_leaf_size"],
        )
        trees = [
            FITree(_rebuild_tree(recs, None, channels), cfg_rec["psi"], cfg_rec["height_limit"])
            for recs in doc["trees"]
        ]
        return IFForest(
            config=config,
            mode=mode.removeprefix("if_"),
            d=channels,
            n_train=doc["n_train"],
            psi=cfg_rec["psi"],
            height_limit=cfg_rec["height_limit"],
            trees=trees,
            c_psi=doc["c_psi"],
        )
    raise DataError(f"{path}: unknown model mode {mode!r}")
