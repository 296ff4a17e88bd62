"""Command-line front end: fit, score, bench, sweep, synth, importance, depthmap.

Configuration comes from an optional JSON file (--config) overridden by
flags (flags win). Every command that consumes randomness requires an
explicit --seed (or a "seed" config entry); there is no wall-clock
fallback, so published numbers stay reproducible.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
error. argparse's own usage failures also exit 2.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from . import evaluation, forest, model_io, synthetic
from .data import load_dataset, save_dataset
from .dictionaries import spec_from_obj as dict_spec_from_obj
from .errors import ConfigError, DataError, FifError
from .products import spec_from_obj as ip_spec_from_obj

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

CONFIG_KEYS = {
    "seed", "n_trees", "psi", "height_limit", "min_leaf_size",
    "dictionary", "inner_product", "threads",
}


def _parse_json_or_name(text: str):
    """Inline JSON objects are accepted wherever a family/kind name is."""
    if text.lstrip().startswith(("{", "[")):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid inline JSON {text!r}: {exc}") from None
    return text


def _parse_height_limit(text: str):
    if text == "auto":
        return "auto"
    if text in ("none", "null"):
        return None
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"height limit must be an int, 'auto', or 'none', got {text!r}") from None


def _parse_size(text: str):
    if text == "auto":
        return "auto"
    if text in ("none", "null"):
        return None
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"dictionary size must be an int, 'auto', or 'none', got {text!r}") from None


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = set(doc) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return doc


def _gather_config(args) -> dict:
    """Merge the JSON config file with flag overrides; flags win."""
    cfg = _load_config_file(args.config) if getattr(args, "config", None) else {}
    for key in ("seed", "n_trees", "psi", "min_leaf_size", "threads"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "height_limit", None) is not None:
        cfg["height_limit"] = _parse_height_limit(args.height_limit)
    if getattr(args, "dictionary", None) is not None:
        cfg["dictionary"] = _parse_json_or_name(args.dictionary)
    if getattr(args, "dictionary_size", None) is not None or getattr(args, "levels", None) is not None:
        spec = dict_spec_from_obj(cfg.get("dictionary", "gaussian_wavelet"))
        if getattr(args, "dictionary_size", None) is not None:
            spec = replace(spec, size=_parse_size(args.dictionary_size))
        if getattr(args, "levels", None) is not None:
            spec = replace(spec, levels=args.levels)
        cfg["dictionary"] = spec
    if getattr(args, "inner_product", None) is not None:
        cfg["inner_product"] = _parse_json_or_name(args.inner_product)
    if getattr(args, "alpha", None) is not None:
        current = cfg.get("inner_product", "l2")
        if isinstance(current, (list, tuple)):
            raise ConfigError("--alpha cannot modify a per-channel inner product list")
        spec = ip_spec_from_obj(current)
        cfg["inner_product"] = {"kind": spec.kind, "alpha": args.alpha}
    cfg.setdefault("threads", os.cpu_count() or 1)
    return cfg


def _forest_config(cfg: dict) -> forest.ForestConfig:
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if cfg.get("seed") is None:
        raise ConfigError(
            "a seed is required (--seed or a 'seed' config entry); "
            "seeding from the clock is not supported"
        )
    return forest.ForestConfig(**cfg)


def _config_doc(cfg: dict) -> dict:
    """Fully resolved config, defaults included, for --print-config."""
    probe = forest.ForestConfig(**{**cfg, "seed": cfg.get("seed") or 0})
    ip = cfg.get("inner_product", "l2")
    if isinstance(ip, (list, tuple)):
        ip_doc = [ip_spec_from_obj(o).to_dict() for o in ip]
    else:
        ip_doc = ip_spec_from_obj(ip).to_dict()
    return {
        "seed": cfg.get("seed"),
        "n_trees": probe.n_trees,
        "psi": probe.psi,
        "height_limit": probe.height_limit,
        "min_leaf_size": probe.min_leaf_size,
        "dictionary": probe.dictionary.to_dict(),
        "inner_product": ip_doc,
        "threads": probe.threads,
    }


def cmd_fit(args) -> int:
    cfg = _gather_config(args)
    if args.print_config:
        print(json.dumps(_config_doc(cfg), indent=2, sort_keys=True))
        if args.data is None:
            return EXIT_OK
    if args.data is None:
        raise ConfigError("fit needs --data")
    if args.out is None:
        raise ConfigError("fit needs --out")
    config = _forest_config(cfg)
    dataset = load_dataset(args.data)
    model = forest.fit(dataset, config)
    model.save(args.out)
    print(f"wrote {args.out} ({model.n_trees} trees, psi={model.psi})")
    return EXIT_OK


def cmd_score(args) -> int:
    model = model_io.load_model(args.model)
    dataset = load_dataset(args.data)
    if isinstance(model, forest.FIForest):
        report = model.score_report(dataset)
    else:
        report = model.score_report(dataset.values.reshape(dataset.n, -1))
    report.to_csv(args.out)
    print(f"wrote {args.out} ({report.scores.size} rows)")
    return EXIT_OK


def cmd_bench(args) -> int:
    names = list(args.dataset) if args.dataset else []
    if args.all:
        names = sorted(evaluation.UCR_TASKS)
    if not names:
        raise ConfigError("bench needs --dataset (repeatable) or --all")
    archive = args.ucr_dir or os.environ.get("FIF_UCR_DIR", os.path.join("data", "UCR"))
    methods = list(args.method) if args.method else ["fif"]
    cfg = _gather_config(args)
    config = _forest_config(cfg)
    seeds = [config.seed + i for i in range(args.n_seeds)]
    rows = []
    summary = []
    for name in names:
        task = evaluation.ucr_task(name, archive)
        for method in methods:
            report = evaluation.run_benchmark(task, config, seeds, method=method)
            rows.extend(report.rows)
            summary.append((name, report.rows[0][1], report.mean_auc, report.sd_auc))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("dataset,method,seed,auc\n")
        for dataset, method, seed, value in rows:
            fh.write(f"{dataset},{method},{seed},{value:.6g}\n")
    summary.sort(key=lambda r: (r[0], r[1]))
    if args.summary_out:
        with open(args.summary_out, "w", encoding="utf-8") as fh:
            fh.write("dataset,method,mean_auc,sd_auc\n")
            for dataset, method, mean, sd in summary:
                fh.write(f"{dataset},{method},{mean:.6g},{sd:.6g}\n")
    cells = [("dataset", "method", "mean_auc", "sd_auc")]
    cells += [(d, m, f"{mean:.6g}", f"{sd:.6g}") for d, m, mean, sd in summary]
    widths = [max(len(row[i]) for row in cells) for i in range(4)]
    for row in cells:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _gather_config(args)
    config = _forest_config(cfg)
    dataset = load_dataset(args.data)
    probes = load_dataset(args.probes)
    tokens = [t for t in args.values.split(",") if t]
    if not tokens:
        raise ConfigError("--values must list at least one value")
    if args.axis in ("n_trees", "psi"):
        values = [int(t) for t in tokens]
    elif args.axis == "height_limit":
        values = [_parse_height_limit(t) for t in tokens]
    elif args.axis == "size":
        values = [_parse_size(t) for t in tokens]
    else:
        values = tokens
    result = evaluation.run_stability_sweep(
        dataset, probes, args.axis, values, args.repeats, config.seed, config
    )
    result.to_csv(args.out)
    print(f"wrote {args.out} ({len(result.rows)} rows)")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.seed is None:
        raise ConfigError("synth needs --seed")
    dataset = synthetic.generate(args.name, seed=args.seed, p=args.p, n=args.n)
    save_dataset(dataset, args.out)
    print(f"wrote {args.out} ({dataset.n} curves, {dataset.p} points)")
    return EXIT_OK


def cmd_importance(args) -> int:
    model = model_io.load_model(args.model)
    if not isinstance(model, forest.FIForest):
        raise ConfigError("importance needs a functional forest model")
    credits = model.direction_importance(mode=args.mode)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("atom,importance\n")
        for i, value in enumerate(credits):
            fh.write(f"{i},{value:.12g}\n")
    print(f"wrote {args.out} ({credits.size} atoms)")
    return EXIT_OK


def cmd_depthmap(args) -> int:
    models = [model_io.load_model(path) for path in args.model]
    for path, model in zip(args.model, models):
        if not isinstance(model, forest.FIForest):
            raise ConfigError(f"{path}: depthmap needs functional forest models")
    dataset = load_dataset(args.data)
    dm = forest.depth_map(models, dataset)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("id," + ",".join(f"depth{k}" for k in range(dm.shape[1])) + "\n")
        for i in range(dm.shape[0]):
            fh.write(str(i) + "," + ",".join(f"{v:.12g}" for v in dm[i]) + "\n")
    print(f"wrote {args.out} ({dm.shape[0]} rows x {dm.shape[1]} models)")
    return EXIT_OK


def _add_config_flags(sp) -> None:
    sp.add_argument("--config", help="JSON config file; flags override its entries")
    sp.add_argument("--seed", type=int, help="base seed for all randomness (required)")
    sp.add_argument("--threads", type=int, help="worker threads (default: available cores)")
    sp.add_argument("--n-trees", dest="n_trees", type=int, help="trees per forest")
    sp.add_argument("--psi", type=int, help="per-tree subsample size")
    sp.add_argument("--height-limit", dest="height_limit",
                    help="tree height cap: int, 'auto', or 'none'")
    sp.add_argument("--min-leaf-size", dest="min_leaf_size", type=int,
                    help="stop splitting nodes at or below this size")
    sp.add_argument("--dictionary", help="dictionary family name or inline JSON spec")
    sp.add_argument("--dictionary-size", dest="dictionary_size",
                    help="atoms to materialize: int, 'auto', or 'none'")
    sp.add_argument("--levels", type=int, help="dyadic dictionary depth")
    sp.add_argument("--inner-product", dest="inner_product",
                    help="'l2', 'deriv', 'combined', or inline JSON spec")
    sp.add_argument("--alpha", type=float, help="value/derivative blend weight")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fif",
        description="Functional isolation forests: fit, score, and benchmark curve data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("fit", help="fit a forest on curve data and save it as JSON")
    sp.add_argument("--data", help="training curves (package CSV or label-first delimited)")
    sp.add_argument("--out", help="model file to write")
    sp.add_argument("--print-config", action="store_true",
                    help="print the fully resolved config (all defaults) as JSON")
    _add_config_flags(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("score", help="score curves with a saved model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True, help="CSV: id,score,depth,rank")
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("bench", help="run labeled train/test benchmarks and report AUC")
    sp.add_argument("--dataset", action="append", choices=sorted(evaluation.UCR_TASKS),
                    help="benchmark dataset name (repeatable)")
    sp.add_argument("--all", action="store_true", help="run every registered dataset")
    sp.add_argument("--ucr-dir", dest="ucr_dir",
                    help="archive root (default: $FIF_UCR_DIR or ./data/UCR)")
    sp.add_argument("--method", action="append", choices=("fif", "if_axis", "if_extended"),
                    help="scoring method (repeatable; default fif)")
    sp.add_argument("--n-seeds", dest="n_seeds", type=int, default=10,
                    help="runs per dataset/method, seeded seed..seed+n-1")
    sp.add_argument("--out", required=True, help="per-seed CSV: dataset,method,seed,auc")
    sp.add_argument("--summary-out", dest="summary_out",
                    help="also write dataset,method,mean_auc,sd_auc")
    _add_config_flags(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("sweep", help="refit along one hyperparameter axis, scoring fixed probes")
    sp.add_argument("--data", required=True, help="training curves")
    sp.add_argument("--probes", required=True, help="probe curves scored at every cell")
    sp.add_argument("--axis", required=True, choices=evaluation.SWEEP_AXES)
    sp.add_argument("--values", required=True, help="comma-separated axis values")
    sp.add_argument("--repeats", type=int, default=100, help="refits per axis value")
    sp.add_argument("--out", required=True, help="CSV: axis_value,repeat,probe_id,score")
    _add_config_flags(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("synth", help="generate a synthetic curve dataset")
    sp.add_argument("name", choices=sorted(synthetic.GENERATORS))
    sp.add_argument("--seed", type=int, help="generator seed (required)")
    sp.add_argument("--p", type=int, default=100, help="grid points per curve")
    sp.add_argument("--n", type=int, default=500, help="curves (families with a free count)")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("importance", help="per-atom split credit from a saved model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--mode", choices=("naive", "adaptive"), default="naive")
    sp.add_argument("--out", required=True, help="CSV: atom,importance")
    sp.set_defaults(func=cmd_importance)

    sp = sub.add_parser("depthmap", help="per-model depth columns for each curve")
    sp.add_argument("--model", action="append", required=True,
                    help="saved model (repeat once per class)")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True, help="CSV: id,depth0,...,depth{q-1}")
    sp.set_defaults(func=cmd_depthmap)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FifError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
