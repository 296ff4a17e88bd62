"""Acceptance suite: one test per release criterion, in order.

Each test prints a single "criterion N PASS/FAIL" line (visible with -s or
in captured output) in addition to its pytest verdict. Criteria 6 and 11
need the benchmark archive on disk (FIF_UCR_DIR, default ./data/UCR) and
skip with a warning when it is absent.

The criterion-1 oracle deliberately reimplements quadrature, projections,
atom sampling, tree growth, and scoring from scratch in plain Python; it
shares nothing with the engine except numpy's generator and the documented
stream layout, so agreement checks the whole fitting path end to end.
"""

import json
import math
import os
import time
import warnings

import numpy as np
import pytest

from fiforest.cli import main as cli_main
from fiforest.data import FunctionalDataset, load_ucr, uniform_grid
from fiforest.evaluation import auc, select_classes, ucr_task
from fiforest.forest import ForestConfig, fit
from fiforest.baseline import fit_if
from fiforest.products import l2_inner, l2_norm
from fiforest.synthetic import brownian_probes, gen_brownian_dataset, gen_cuevas105
from fiforest.tree import count_nodes

UCR_DIR = os.environ.get("FIF_UCR_DIR", os.path.join("data", "UCR"))


def report(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {num}: {detail}"


def ucr_or_skip(num: int) -> None:
    if not os.path.isdir(UCR_DIR):
        msg = (
            f"criterion {num} SKIP: benchmark archive not found at {UCR_DIR!r}; "
            "set FIF_UCR_DIR to run this check"
        )
        warnings.warn(msg)
        print(msg)
        pytest.skip(msg)


# --------------------------------------------------------------------------
# Criterion 1: an independent reimplementation of the scoring pipeline.
# --------------------------------------------------------------------------

GAMMA = 0.5772156649


def _o_weights(t):
    w = np.zeros(t.size)
    dt = np.diff(t)
    w[:-1] += 0.5 * dt
    w[1:] += 0.5 * dt
    return w


def _o_diff(f, t):
    out = np.empty_like(f)
    d = np.diff(f) / np.diff(t)
    out[:-1] = d
    out[-1] = d[-1]
    return out


def _o_pair(f, g, t, w, kind, alpha):
    def dot(a, b):
        return float(np.sum(a * b * w))

    if kind == "l2":
        return dot(f, g)
    if kind == "deriv":
        return dot(_o_diff(f, t), _o_diff(g, t))
    raw = dot(f, g)
    denom = math.sqrt(dot(f, f)) * math.sqrt(dot(g, g))
    term = 0.0 if denom < 1e-12 else raw / denom
    df, dg = _o_diff(f, t), _o_diff(g, t)
    raw_d = dot(df, dg)
    denom_d = math.sqrt(dot(df, df)) * math.sqrt(dot(dg, dg))
    term_d = 0.0 if denom_d < 1e-12 else raw_d / denom_d
    return alpha * term + (1.0 - alpha) * term_d


def _o_c(m):
    if m <= 1:
        return 0.0
    if m == 2:
        return 1.0
    return 2.0 * (math.log(m - 1) + GAMMA) - 2.0 * (m - 1) / m


def _oracle_score(values, t, seed, dict_kind, ip_kind, alpha, height_limit, query):
    """Brute-force one-tree anomaly score, replaying the documented draws."""
    n = values.shape[0]
    w = _o_weights(t)
    streams = np.random.SeedSequence(seed).spawn(2)

    if dict_kind == "cosine_table":
        rng0 = np.random.default_rng(streams[0])
        atoms = []
        for _ in range(7):
            a = float(rng0.uniform(0.0, 1.0))
            om = float(rng0.uniform(0.0, 10.0))
            atoms.append(a * np.cos(2.0 * np.pi * om * t))
    elif dict_kind == "brownian_table":
        rng0 = np.random.default_rng(streams[0])
        atoms = []
        for _ in range(5):
            steps = rng0.standard_normal(t.size - 1) * np.sqrt(np.diff(t))
            atoms.append(np.concatenate([[0.0], np.cumsum(steps)]))
    elif dict_kind == "dyadic":
        levels = max(1, math.ceil(math.log2(t.size)))
        atoms = []
        for level in range(1, levels + 1):
            for cell in range(2**level):
                lo, hi = cell / 2**level, (cell + 1) / 2**level
                atoms.append(((t >= lo) & (t <= hi)).astype(float))
    else:
        atoms = None

    rng = np.random.default_rng(streams[1])
    # psi equals n in these problems, so no subsample draw happens

    if dict_kind == "self":
        def draw():
            return ("row", int(rng.integers(0, n)))

        def proj(curve, handle):
            return _o_pair(curve, values[handle[1]], t, w, ip_kind, alpha)
    elif dict_kind == "cosine_fresh":
        def draw():
            a = float(rng.uniform(0.0, 1.0))
            om = float(rng.uniform(0.0, 10.0))
            return ("vals", a * np.cos(2.0 * np.pi * om * t))

        def proj(curve, handle):
            return _o_pair(curve, handle[1], t, w, ip_kind, alpha)
    else:
        def draw():
            return ("idx", int(rng.integers(0, len(atoms))))

        def proj(curve, handle):
            return _o_pair(curve, atoms[handle[1]], t, w, ip_kind, alpha)

    def grow_node(rows, depth):
        m = len(rows)
        if m <= 1 or (height_limit is not None and depth >= height_limit):
            return ("leaf", m)
        handle = draw()
        projections = [proj(values[i], handle) for i in rows]
        lo, hi = min(projections), max(projections)
        if hi - lo <= 1e-12:
            return ("leaf", m)
        cut = None
        for _ in range(8):
            cand = rng.uniform(lo, hi)
            if cand < hi:
                cut = cand
                break
        if cut is None:
            return ("leaf", m)
        left = [i for i, pr in zip(rows, projections) if pr <= cut]
        right = [i for i, pr in zip(rows, projections) if pr > cut]
        return ("node", handle, cut, grow_node(left, depth + 1), grow_node(right, depth + 1))

    root = grow_node(list(range(n)), 0)
    node, depth = root, 0
    while node[0] == "node":
        _, handle, cut, left, right = node
        node = left if proj(query, handle) <= cut else right
        depth += 1
    return 2.0 ** (-(depth + _o_c(node[1])) / _o_c(n))


ORACLE_DICTS = {
    "cosine_table": {"family": "cosine", "size": 7},
    "brownian_table": {"family": "brownian", "size": 5},
    "dyadic": {"family": "dyadic_indicator"},
    "self": "self",
    "cosine_fresh": {"family": "cosine", "size": None},
}

ORACLE_PRODUCTS = [("l2", 0.5), ("deriv", 0.5), ("combined", 0.5), ("combined", 1.0)]


def test_criterion_01_engine_matches_independent_oracle():
    started = time.time()
    dict_kinds = list(ORACLE_DICTS)
    worst = 0.0
    for k in range(200):
        rng = np.random.default_rng(10_000 + k)
        n = int(rng.integers(2, 9))
        p = int(rng.integers(8, 25))
        t = np.linspace(0.0, 1.0, p)
        values = rng.standard_normal((n, p)).cumsum(axis=1)
        query = values[int(rng.integers(0, n))] if k % 2 else rng.standard_normal(p).cumsum()
        dict_kind = dict_kinds[k % len(dict_kinds)]
        ip_kind, alpha = ORACLE_PRODUCTS[k % len(ORACLE_PRODUCTS)]
        limit = None if k % 3 else math.ceil(math.log2(n))
        seed = 77_000 + k

        config = ForestConfig(
            seed=seed,
            n_trees=1,
            psi=n,
            height_limit=limit if k % 3 == 0 else None,
            dictionary=ORACLE_DICTS[dict_kind],
            inner_product={"kind": ip_kind, "alpha": alpha},
        )
        data = FunctionalDataset(grid=uniform_grid(p), values=values)
        engine = float(fit(data, config).score_samples(query[np.newaxis, :])[0])
        oracle = _oracle_score(
            values, t, seed, dict_kind, ip_kind, alpha,
            limit if k % 3 == 0 else None, query,
        )
        worst = max(worst, abs(engine - oracle))
        assert abs(engine - oracle) < 1e-12, (
            f"problem {k}: engine {engine!r} vs oracle {oracle!r} "
            f"({dict_kind}, {ip_kind}, alpha={alpha})"
        )
    elapsed = time.time() - started
    report(1, worst < 1e-12 and elapsed < 5.0,
           f"200 problems, max |engine - oracle| = {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_full_trees_have_psi_leaves():
    bad = []
    for psi in range(2, 129):
        data = gen_brownian_dataset(psi, 20, seed=300 + psi)
        f = fit(data, ForestConfig(
            seed=500 + psi, n_trees=1, psi=psi, height_limit=None,
            dictionary={"family": "cosine", "size": 31},
        ))
        internal, leaves = count_nodes(f.trees[0].root)
        if (internal, leaves) != (psi - 1, psi):
            bad.append((psi, internal, leaves))
    report(2, not bad, f"psi in 2..128 all give (psi-1, psi) node counts; violations: {bad}")


def test_criterion_03_planted_anomalies_take_top_ranks():
    data = gen_cuevas105(seed=7)
    started = time.time()
    wins = 0
    for r in range(100):
        config = ForestConfig(
            seed=r,
            dictionary={"family": "gaussian_wavelet", "size": 1000},
            inner_product={"kind": "combined", "alpha": 0.5},
        )
        scores = fit(data, config).score_samples(data)
        if set(np.argsort(-scores)[:5].tolist()) == {100, 101, 102, 103, 104}:
            wins += 1
    elapsed = time.time() - started
    report(3, wins >= 95 and elapsed < 60.0,
           f"top-5 exact in {wins}/100 runs (need >= 95), {elapsed:.1f}s (limit 60)")


@pytest.fixture(scope="module")
def brownian_probe_runs():
    data = gen_brownian_dataset(500, 100, seed=11)
    probes = brownian_probes(p=100)
    started = time.time()
    full = np.array([
        fit(data, ForestConfig(seed=1000 + r)).score_samples(probes) for r in range(100)
    ])
    elapsed_full = time.time() - started
    tiny = np.array([
        fit(data, ForestConfig(seed=2000 + r, n_trees=5)).score_samples(probes)
        for r in range(100)
    ])
    return full, tiny, elapsed_full


def test_criterion_04_probe_scores_order_by_extremity(brownian_probe_runs):
    full, _, elapsed = brownian_probe_runs
    med = np.median(full, axis=0)
    ok = med[0] < med[1] <= med[2] < med[3] and elapsed < 120.0
    report(4, ok, f"median probe scores {np.round(med, 4).tolist()} "
                  f"satisfy s0 < s1 <= s2 < s3, {elapsed:.1f}s (limit 120)")


def test_criterion_05_more_trees_shrink_score_variance(brownian_probe_runs):
    full, tiny, _ = brownian_probe_runs
    v_full = full.var(axis=0, ddof=1)
    v_tiny = tiny.var(axis=0, ddof=1)
    ok = bool(np.all(v_full < v_tiny))
    report(5, ok, f"per-probe variance at N=100 {np.format_float_scientific(v_full.max(), 2)} max "
                  f"< N=5 {np.format_float_scientific(v_tiny.min(), 2)} min" if ok
           else f"variance not reduced: N=100 {v_full}, N=5 {v_tiny}")


def _benchmark_auc(name, dictionary, inner_product, seeds):
    task = ucr_task(name, UCR_DIR)
    train = select_classes(load_ucr(task.train_path), task.normal_labels,
                           task.anomaly_labels, task.train_anomaly_cap)
    test = select_classes(load_ucr(task.test_path), task.normal_labels,
                          task.anomaly_labels, task.test_anomaly_cap)
    values = []
    for seed in seeds:
        config = ForestConfig(seed=seed, dictionary=dictionary, inner_product=inner_product)
        scores = fit(train, config).score_samples(test)
        values.append(auc(scores, test.labels))
    return float(np.mean(values))


def test_criterion_06_benchmark_spot_checks():
    ucr_or_skip(6)
    checks = [
        ("ECG5000", {"family": "cosine", "size": 1000},
         {"kind": "combined", "alpha": 1.0}, 0.93),
        ("CinECGTorso", {"family": "cosine", "size": 1000},
         {"kind": "combined", "alpha": 0.5}, 0.87),
        ("Chinatown", {"family": "dyadic_indicator"}, "l2", 0.88),
    ]
    results = []
    ok = True
    for name, dictionary, product, floor in checks:
        started = time.time()
        value = _benchmark_auc(name, dictionary, product, seeds=[0, 1, 2])
        elapsed = time.time() - started
        results.append(f"{name} AUC {value:.3f} (floor {floor}, {elapsed:.0f}s)")
        ok = ok and value >= floor and elapsed < 120.0
    report(6, ok, "; ".join(results))


def test_criterion_07_auc_matches_exhaustive_pair_counting():
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 1000:
        n = int(rng.integers(2, 51))
        labels = (rng.random(n) < 0.3).astype(int)
        if labels.sum() in (0, n):
            continue
        scores = np.round(rng.standard_normal(n), 1)
        pos = scores[labels == 1]
        neg = scores[labels == 0]
        wins = float((pos[:, None] > neg[None, :]).sum())
        ties = float((pos[:, None] == neg[None, :]).sum())
        expected = (wins + 0.5 * ties) / (pos.size * neg.size)
        assert auc(scores, labels) == expected, f"instance {checked}"
        checked += 1
    report(7, True, "1000 random instances agree exactly with pair counting")


def test_criterion_08_baselines_isolate_a_planted_outlier():
    hits = {"axis": 0, "extended": 0}
    for seed in range(20):
        rng = np.random.default_rng(seed)
        X = np.vstack([rng.standard_normal((500, 2)), [[8.0, 8.0]]])
        for mode in hits:
            f = fit_if(X, ForestConfig(seed=40_000 + seed), mode=mode)
            if int(np.argmax(f.score_samples(X))) == 500:
                hits[mode] += 1
    ok = hits["axis"] == 20 and hits["extended"] == 20
    report(8, ok, f"outlier ranked first in {hits['axis']}/20 axis and "
                  f"{hits['extended']}/20 extended runs")


def test_criterion_09_fits_are_deterministic(tmp_path):
    data_path = tmp_path / "train.csv"
    assert cli_main(["synth", "cuevas105", "--seed", "3", "--out", str(data_path)]) == 0
    fit_args = ["fit", "--data", str(data_path), "--seed", "21", "--n-trees", "30"]
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert cli_main(fit_args + ["--out", str(p)]) == 0
    identical = paths[0].read_bytes() == paths[1].read_bytes()

    score_texts = []
    for threads in ("1", "4"):
        model = tmp_path / f"m{threads}.json"
        out = tmp_path / f"s{threads}.csv"
        assert cli_main(fit_args + ["--out", str(model), "--threads", threads]) == 0
        assert cli_main(["score", "--model", str(model), "--data", str(data_path),
                         "--out", str(out)]) == 0
        score_texts.append(out.read_text())
    thread_free = score_texts[0] == score_texts[1]
    report(9, identical and thread_free,
           f"refit byte-identical: {identical}; scores thread-independent: {thread_free}")


def test_criterion_10_quadrature_and_cauchy_schwarz():
    grid = uniform_grid(1001)
    t = grid.points
    third = l2_inner(t, t, grid)
    quad_ok = abs(third - 1.0 / 3.0) < 1e-5

    rng = np.random.default_rng(123)
    grid_small = uniform_grid(30)
    violations = 0
    for _ in range(10_000):
        f, g = rng.standard_normal((2, 30)).cumsum(axis=1)
        if abs(l2_inner(f, g, grid_small)) > l2_norm(f, grid_small) * l2_norm(g, grid_small) * (1 + 1e-12):
            violations += 1
    report(10, quad_ok and violations == 0,
           f"<t,t> = {third:.8f} (|err| < 1e-5: {quad_ok}); "
           f"Cauchy-Schwarz violations: {violations}/10000")


def test_criterion_11_importance_localizes_the_discriminative_region():
    ucr_or_skip(11)
    task = ucr_task("CinECGTorso", UCR_DIR)
    train = select_classes(load_ucr(task.train_path), task.normal_labels,
                           task.anomaly_labels, task.train_anomaly_cap)
    hits = 0
    details = []
    for seed in range(10):
        config = ForestConfig(seed=seed, dictionary={"family": "dyadic_indicator"})
        f = fit(train, config)
        credits = f.direction_importance(mode="adaptive")
        top2 = np.argsort(-credits)[:2]
        spans = []
        good = True
        for idx in top2:
            prov = f.atoms[idx].provenance
            lo = prov["cell"] / 2 ** prov["level"]
            hi = (prov["cell"] + 1) / 2 ** prov["level"]
            spans.append((round(lo, 3), round(hi, 3)))
            good = good and (lo <= 0.5 and hi >= 0.3)
        hits += good
        details.append(spans)
    report(11, hits >= 8, f"top-2 atom supports touch [0.3, 0.5] in {hits}/10 seeds; "
                          f"first run spans {details[0]}")
