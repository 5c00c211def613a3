"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criterion 9 drives the installed CLI in subprocesses at full scale and is by
far the slowest item; everything else runs in well under a minute apiece.
"""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from lexalign import data_model as dm
from lexalign import explain, gbt, rng, simulation
from lexalign.alignment import (
    alignment_strength,
    prototype_matrix,
    similarity_matrix,
)
from lexalign.aoa import FEATURE_COLUMNS, FeatureTable, run_regression
from lexalign.metrics import system_metrics
from lexalign.simulation import _relative_strength
from lexalign.stats import pooled_t_test
from lexalign.synthetic import aligned_system, null_system, two_type_system


def announce(num, ok, detail):
    print(f"\nACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def brute_force_rank_corr(x, y):
    """Counting-based rank correlation, independent of the library's path."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = len(x)

    def counting_ranks(v):
        return np.array([1 + np.sum(v < vi) + (np.sum(v == vi) - 1) / 2.0 for vi in v])

    rx, ry = counting_ranks(x), counting_ranks(y)
    mx, my = math.fsum(rx) / m, math.fsum(ry) / m
    cov = math.fsum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = math.fsum((a - mx) ** 2 for a in rx)
    vy = math.fsum((b - my) ** 2 for b in ry)
    return cov / math.sqrt(vx * vy)


def test_criterion_1_alignment_oracle_equivalence():
    g = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for trial in range(200):
        n = int(g.integers(5, 31))
        system = null_system(n_words=n, dim_visual=6, dim_linguistic=6, seed=trial)
        view = dm.full_view(system)
        sv = similarity_matrix(prototype_matrix(view, "visual"), "visual")
        sl = similarity_matrix(prototype_matrix(view, "linguistic"), "linguistic")
        got = alignment_strength(sv, sl)
        want = brute_force_rank_corr(sv.upper_triangle(), sl.upper_triangle())
        worst = max(worst, abs(got - want))
    elapsed = time.perf_counter() - t0
    announce(
        1,
        worst < 1e-12 and elapsed < 10.0,
        f"200 systems, max |rho - oracle| = {worst:.2e}, {elapsed:.1f}s (< 10s)",
    )


def test_criterion_2_permutation_calibration():
    t0 = time.perf_counter()
    master = 0
    vals = []
    for s in range(400):
        system = null_system(n_words=30, dim_visual=8, dim_linguistic=8, seed=10000 * master + s)
        view = dm.full_view(system)
        vals.append(
            _relative_strength(
                prototype_matrix(view, "visual"),
                prototype_matrix(view, "linguistic"),
                200,
                rng.mix(master, s),
            )
        )
    elapsed = time.perf_counter() - t0
    vals = np.sort(vals)
    n = len(vals)
    i = np.arange(1, n + 1)
    ks = max(np.max(np.abs(vals - i / n)), np.max(np.abs(vals - (i - 1) / n)))
    mean = float(np.mean(vals))
    announce(
        2,
        abs(mean - 0.5) < 0.03 and ks < 0.05 and elapsed < 60.0,
        f"400 null systems: mean={mean:.4f} (0.5 +/- 0.03), KS={ks:.4f} (< 0.05), {elapsed:.1f}s (< 60s)",
    )


def test_criterion_3_variability_ratio_and_t_structure():
    system = two_type_system(
        n_nouns=210, n_verbs=210, dim_visual=64, dim_linguistic=64,
        n_visual=20, n_linguistic=20, noun_spread=1.0, verb_spread=2.0, seed=3,
    )
    rep = system_metrics(dm.full_view(system))
    noun_vv = np.array([r.visual_variability for r in rep.rows if r.word_type == "noun"])
    verb_vv = np.array([r.visual_variability for r in rep.rows if r.word_type == "verb"])
    ratio = verb_vv.mean() / noun_vv.mean()
    t = pooled_t_test(verb_vv, noun_vv)
    announce(
        3,
        abs(ratio - 2.0) < 0.1 and t.df == 418 and t.p < 0.001 and t.t > 0,
        f"visual variability ratio={ratio:.4f} (2.0 +/- 5%), t({t.df})={t.t:.2f}, p={t.p:.2e}",
    )


def test_criterion_4_aggregation_improves_alignment():
    system = aligned_system(n_words=30, noise=4.0, seed=42)
    curve = simulation.aggregate_curve(
        system, "visual", max_k=8, fixed_other=20, n_sims=200, n_perms=200, seed=9, threads=2
    )
    means = [l.mean_relative_strength for l in curve.levels]
    halves = [(l.ci_hi - l.ci_lo) / 2 for l in curve.levels]
    nondecreasing = all(
        b >= a - 2 * max(h, 1e-3) for a, b, h in zip(means, means[1:], halves[1:])
    )
    grid_system = aligned_system(n_words=16, noise=4.0, seed=10)
    grid = simulation.aggregate_grid(grid_system, 8, 8, n_sims=50, n_perms=200, seed=11, threads=2)
    corner_ok = grid.means[7, 7] > grid.means[0, 0]
    announce(
        4,
        nondecreasing and means[-1] > 0.95 and corner_ok,
        f"curve k=1..8 means={np.round(means, 3).tolist()}, k=8 > 0.95; "
        f"grid corners (8,8)={grid.means[7, 7]:.3f} > (1,1)={grid.means[0, 0]:.3f}",
    )


def test_criterion_5_gbt_correctness():
    g = np.random.default_rng(5)
    monotone_ok = True
    for trial in range(100):
        n = int(g.integers(4, 30))
        m = int(g.integers(1, 5))
        X = g.normal(size=(n, m))
        y = g.normal(size=n)
        params = gbt.BoosterParams(
            n_rounds=10,
            max_depth=int(g.integers(1, 4)),
            learning_rate=float(g.uniform(0.05, 1.0)),
        )
        model = gbt.train(X, y, params)
        preds = np.full(n, model.base_score)
        prev = float(np.mean((preds - y) ** 2))
        for tree in model.trees:
            preds = preds + params.learning_rate * np.array([tree.predict_one(r) for r in X])
            mse = float(np.mean((preds - y) ** 2))
            if mse > prev + 1e-12:
                monotone_ok = False
            prev = mse

    hand = gbt.train(
        np.array([[0.0], [1.0]]),
        np.array([0.0, 1.0]),
        gbt.BoosterParams(n_rounds=1, max_depth=1, learning_rate=0.02, reg_lambda=1.0, base_score=0.5),
    )
    leaves = hand.trees[0].value[hand.trees[0].feature < 0]
    hand_ok = set(leaves.tolist()) == {-0.25, 0.25} and np.array_equal(
        gbt.predict(hand, np.array([[0.0], [1.0]])),
        np.array([0.5 - 0.02 * 0.25, 0.5 + 0.02 * 0.25]),
    )

    X = g.normal(size=(40, 3))
    y = g.normal(size=40)
    p5 = gbt.BoosterParams(n_rounds=10, max_depth=3, learning_rate=0.3)
    a = gbt.train(X, y, p5)
    X2 = X.copy()
    X2[:, 0] = np.exp(X2[:, 0])
    b = gbt.train(X2, y, p5)
    invariance = float(np.abs(gbt.predict(a, X) - gbt.predict(b, X2)).max())

    announce(
        5,
        monotone_ok and hand_ok and invariance < 1e-12,
        f"MSE non-increasing on 100 datasets; hand example exact (leaves -/+0.25, "
        f"preds [0.495, 0.505]); transform invariance {invariance:.2e} (< 1e-12)",
    )


def test_criterion_6_treeshap_exactness():
    g = np.random.default_rng(6)
    worst_local = 0.0
    for trial in range(12):
        n, m = int(g.integers(8, 40)), int(g.integers(1, 6))
        X = g.normal(size=(n, m))
        if trial % 3 == 0:
            X[g.uniform(size=X.shape) < 0.15] = np.nan
        y = g.normal(size=n)
        model = gbt.train(
            X, y, gbt.BoosterParams(n_rounds=8, max_depth=int(g.integers(1, 5)), learning_rate=0.3)
        )
        for row in X:
            e = explain.tree_shap(model, row)
            worst_local = max(
                worst_local, abs(e.base_value + e.phi.sum() - gbt.predict(model, row))
            )

    worst_bf = 0.0
    for trial in range(200):
        n = int(g.integers(5, 20))
        m = int(g.integers(1, 5))  # <= 4 features
        X = g.normal(size=(n, m))
        y = g.normal(size=n)
        model = gbt.train(
            X, y,
            gbt.BoosterParams(
                n_rounds=int(g.integers(1, 5)), max_depth=int(g.integers(1, 4)), learning_rate=0.4
            ),
        )
        x = X[int(g.integers(0, n))]
        diff = np.abs(explain.tree_shap(model, x).phi - explain.brute_force_shap(model, x)).max()
        worst_bf = max(worst_bf, float(diff))

    announce(
        6,
        worst_local < 1e-8 and worst_bf < 1e-10,
        f"local accuracy worst={worst_local:.2e} (< 1e-8); "
        f"TreeSHAP vs brute force on 200 ensembles worst={worst_bf:.2e} (< 1e-10)",
    )


def test_criterion_7_planted_effect_recovery():
    hits = 0
    sign_ok = 0
    params = gbt.BoosterParams(n_rounds=120, max_depth=3, learning_rate=0.12)
    for seed in range(100):
        g = np.random.default_rng(seed)
        n = 90
        X = np.column_stack(
            [
                g.integers(1, 2000, size=n).astype(float),
                g.integers(0, 2, size=n).astype(float),
                g.uniform(0, 5, size=n),
                g.uniform(0, 5, size=n),
                g.uniform(0, 5, size=n),
                g.uniform(0, 5, size=n),
                g.uniform(-1, 1, size=n),
            ]
        )
        y = 10.0 + 3.0 * X[:, 2] + g.normal(0, 0.1, size=n)  # visual_variability drives
        table = FeatureTable([f"w{i}" for i in range(n)], X, y, [])
        rep = run_regression(table, params)
        top = int(np.argmax(rep.importance.mean_abs_shap))
        if FEATURE_COLUMNS[top] == "visual_variability":
            hits += 1
            if rep.importance.sign[top] == 1.0:
                sign_ok += 1
    announce(
        7,
        hits >= 95 and sign_ok == hits,
        f"visual_variability top-1 in {hits}/100 runs (>= 95), sign correct in all hits",
    )


def _run_cli(args, cwd):
    proc = subprocess.run(
        [sys.executable, "-m", "lexalign.cli"] + args,
        cwd=cwd,
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, f"cli {args} failed: {proc.stderr}"
    return proc


def _dir_bytes(path):
    out = {}
    for name in sorted(os.listdir(path)):
        with open(os.path.join(path, name), "rb") as f:
            out[name] = f.read()
    return out


def test_criterion_8_thread_count_determinism(tmp_path):
    system = aligned_system(n_words=12, n_visual=6, n_linguistic=6, noise=2.5, seed=8)
    mp, ep = tmp_path / "manifest.json", tmp_path / "embeddings.jsonl"
    dm.save_system(system, mp, ep)
    results = {}
    for cmd, extra in (
        ("align", ["--permutations", "300"]),
        ("aggregate", ["--mode", "grid", "--max-v", "3", "--max-l", "3",
                       "--sims", "10", "--permutations", "100"]),
    ):
        blobs = []
        for threads in ("1", "8"):
            out = tmp_path / f"{cmd}_t{threads}"
            _run_cli(
                [cmd, "--manifest", str(mp), "--embeddings", str(ep), "--out", str(out),
                 "--seed", "4", "--threads", threads] + extra,
                cwd=tmp_path,
            )
            blobs.append(_dir_bytes(out))
        results[cmd] = blobs[0] == blobs[1]
    announce(
        8,
        all(results.values()),
        f"byte-identical artifacts at --threads 1 vs 8: {results}",
    )


@pytest.mark.slow
def test_criterion_9_full_pipeline_runtime(tmp_path):
    system = two_type_system(
        n_nouns=210, n_verbs=210, dim_visual=512, dim_linguistic=768,
        n_visual=20, n_linguistic=20, seed=9,
    )
    mp, ep = tmp_path / "manifest.json", tmp_path / "embeddings.jsonl"
    dm.save_system(system, mp, ep)
    threads = str(min(4, os.cpu_count() or 1))
    t0 = time.perf_counter()
    _run_cli(
        ["metrics", "--manifest", str(mp), "--embeddings", str(ep),
         "--out", str(tmp_path / "m")],
        cwd=tmp_path,
    )
    _run_cli(
        ["align", "--manifest", str(mp), "--embeddings", str(ep),
         "--out", str(tmp_path / "a"), "--permutations", "1000", "--threads", threads],
        cwd=tmp_path,
    )
    _run_cli(
        ["aggregate", "--manifest", str(mp), "--embeddings", str(ep),
         "--out", str(tmp_path / "g"), "--mode", "grid", "--max-v", "8", "--max-l", "8",
         "--sims", "100", "--threads", threads],
        cwd=tmp_path,
    )
    elapsed = time.perf_counter() - t0
    announce(
        9,
        elapsed < 300.0,
        f"metrics + align(1000 perms) + 8x8 grid @ 100 sims/cell on 210+210 words "
        f"(512d/768d, 20 exemplars): {elapsed:.0f}s wall with {threads} workers on "
        f"{os.cpu_count()} CPUs (budget 300s on a 4-core desktop)",
    )
