"""Acceptance gate: ten criteria, one PASS/FAIL line each.

Each test prints ``ACCEPTANCE criterion N: PASS/FAIL`` with the measured
numbers, then asserts.  Criterion 9 runs only when converted Cora/Citeseer
datasets are present under data/cora and data/citeseer at the repository
root (the documented on-disk format: meta.json, edges.tsv, features.csv,
labels.csv, splits.json); otherwise it is reported SKIPPED.
"""

import os
import time

import numpy as np
import pytest

from legnn import (
    NoiseSpec,
    TrainConfig,
    bidirectional_loss,
    bootstrap_views,
    build_graph,
    build_transition,
    cross_entropy,
    flip_labels,
    gather_labels,
    gcn_backward,
    gcn_forward,
    gen_sbm,
    negative_loss,
    normalize,
    positive_loss,
    run_experiment,
    voting_error_rate,
)
from legnn.ensemble import make_snapshot
from legnn.experiment import bench_overhead
from legnn.nn import GcnModel

from conftest import finite_difference, make_model, max_rel_error

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# Frozen benchmark configuration: 5-class, 500-node planted partition with
# feature_shift tuned so the clean backbone reaches >= 85% test accuracy.
SBM500 = {"classes": 5, "nodes_per_class": 100, "p_in": 0.05, "p_out": 0.005,
          "feature_dim": 16, "feature_shift": 2.5, "seed": 101}
TRAIN = {"learning_rate": 0.2}
SEEDS = [0, 1, 2, 3, 4]


def report(criterion, ok, detail):
    print(f"\nACCEPTANCE criterion {criterion}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"criterion {criterion}: {detail}"


@pytest.fixture(scope="module")
def sym50_results():
    cfg = {"sbm": SBM500, "train": TRAIN, "seeds": SEEDS,
           "noise": {"kind": "symmetric", "tau": 0.5},
           "methods": ["gcn", "legnn", "confidence",
                       "legnn_no_negative", "legnn_no_gathering"]}
    t0 = time.perf_counter()
    results = {r.method: r for r in run_experiment(cfg)}
    return results, time.perf_counter() - t0


@pytest.fixture(scope="module")
def sym30_quality():
    cfg = {"sbm": SBM500, "train": TRAIN, "seeds": SEEDS,
           "noise": {"kind": "symmetric", "tau": 0.3},
           "methods": ["legnn", "propagation"], "metric_split": "all"}
    return {r.method: r for r in run_experiment(cfg)}


@pytest.fixture(scope="module")
def mask_rate_sweep():
    cfg = {"sbm": SBM500, "train": TRAIN, "seeds": SEEDS,
           "noise": {"kind": "symmetric", "tau": 0.3},
           "methods": ["legnn"],
           "grid": {"mask_rate": [0.2, 0.4, 0.5, 0.6, 0.8]}}
    return {r.grid_point["mask_rate"]: 100 * r.test_accuracy_mean
            for r in run_experiment(cfg)}


def test_criterion_1_gradient_correctness():
    t0 = time.perf_counter()
    g = normalize(build_graph([(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (1, 4)], 6))
    model = make_model(3, 4, 3, seed=13, dropout=0.0)
    X = np.random.default_rng(7).standard_normal((6, 3))
    labels = np.array([0, 1, 2, 0, 1, 2])
    idx = np.arange(6)
    Z0, _ = gcn_forward(model, g, X, mode="infer")
    yp = np.zeros_like(Z0, dtype=bool)
    yp[np.arange(6), Z0.argmax(axis=1)] = True
    yp[np.arange(6), (Z0.argmax(axis=1) + 1) % 3] = True
    yn = np.zeros_like(yp)
    yn[np.arange(6), Z0.argmin(axis=1)] = True
    snap = make_snapshot(Z0, yp, yn)

    losses = {
        "CE": lambda Z: cross_entropy(Z, labels, idx),
        "positive": lambda Z: positive_loss(Z, snap),
        "negative": lambda Z: negative_loss(Z, snap),
        "bidirectional": lambda Z: (lambda r: (r.total, r.dZ))(bidirectional_loss(Z, snap)),
    }
    worst = 0.0
    for name, fn in losses.items():
        Z, cache = gcn_forward(model, g, X, mode="infer")
        _, dZ = fn(Z)
        analytic = gcn_backward(cache, dZ)

        def loss_of(m, fn=fn):
            Zm, _ = gcn_forward(m, g, X, mode="infer")
            return fn(Zm)[0]

        num1, num2 = finite_difference(loss_of, model)
        worst = max(worst, max_rel_error(analytic.dW1, num1),
                    max_rel_error(analytic.dW2, num2))
    elapsed = time.perf_counter() - t0
    report(1, worst < 1e-4 and elapsed < 10,
           f"max relative gradient error {worst:.2e} (< 1e-4), {elapsed:.1f}s")


def test_criterion_2_voting_oracle():
    t0 = time.perf_counter()
    v = voting_error_rate(5, 0.3)
    exact = sum(
        0.3 ** bin(b).count("1") * 0.7 ** (5 - bin(b).count("1"))
        for b in range(32) if bin(b).count("1") >= 3
    )
    ok = abs(v - 0.16308) < 1e-5 and abs(v - exact) < 1e-12 and v < 0.3
    report(2, ok and time.perf_counter() - t0 < 1,
           f"voting_error_rate(5, 0.3) = {v:.5f} (target 0.16308, < alpha)")


def test_criterion_3_noise_statistics():
    t0 = time.perf_counter()
    n = 100_000
    rng = np.random.default_rng(0)
    labels = rng.integers(0, 3, size=n)
    T = build_transition(NoiseSpec("symmetric", 0.3, 3))
    out = flip_labels(labels, T, np.random.default_rng(1))
    worst_sigmas = 0.0
    for i in range(3):
        mask = labels == i
        ni = int(mask.sum())
        for j in range(3):
            p = T[i, j]
            freq = np.mean(out[mask] == j)
            worst_sigmas = max(worst_sigmas,
                               abs(freq - p) / np.sqrt(p * (1 - p) / ni))
    elapsed = time.perf_counter() - t0
    report(3, worst_sigmas < 3 and elapsed < 5,
           f"worst confusion-matrix cell deviation {worst_sigmas:.2f} sigma (< 3), "
           f"{elapsed:.1f}s")


def test_criterion_4_ensemble_invariants():
    t0 = time.perf_counter()
    b = gen_sbm(4, 50, 0.1, 0.01, 8, 2.0, seed=11)  # 200 nodes
    g = normalize(b.graph)
    model = make_model(8, 16, 4, seed=3)
    views = bootstrap_views(g, 0.5, 10, seed=21)
    snap = gather_labels(model, views, b.features)

    yp = np.zeros((200, 4), dtype=bool)
    yn = np.zeros((200, 4), dtype=bool)
    for view in views:
        Z, _ = gcn_forward(model, view, b.features, mode="infer")
        for i in range(200):
            yp[i, int(np.argmax(Z[i]))] = True
            yn[i, int(np.argmin(Z[i]))] = True
    exact = np.array_equal(snap.yp, yp) and np.array_equal(snap.yn, yn)
    nonempty = snap.yp.any(axis=1).all() and snap.yn.any(axis=1).all()

    extended = views + bootstrap_views(g, 0.5, 1, seed=22)
    bigger = gather_labels(model, extended, b.features)
    monotone = np.all(bigger.yp[snap.yp]) and np.all(bigger.yn[snap.yn])
    elapsed = time.perf_counter() - t0
    report(4, exact and nonempty and monotone and elapsed < 30,
           f"brute-force oracle bit-exact={exact}, rows nonempty={nonempty}, "
           f"M_e monotone={monotone}, {elapsed:.1f}s")


def test_criterion_5_effectiveness(sym50_results):
    results, elapsed = sym50_results
    # prerequisite: feature_shift is tuned so the clean backbone is strong
    clean = run_experiment({"sbm": SBM500, "train": TRAIN, "seeds": [0],
                            "methods": ["gcn"]})[0]
    clean_acc = 100 * clean.test_accuracy_mean
    gcn = 100 * results["gcn"].test_accuracy_mean
    legnn = 100 * results["legnn"].test_accuracy_mean
    conf = 100 * results["confidence"].test_accuracy_mean
    ok = clean_acc >= 85 and legnn - gcn >= 3 and legnn > conf and elapsed < 300
    report(5, ok,
           f"clean GCN {clean_acc:.2f} (>= 85); Sym-50%: LEGNN {legnn:.2f} vs "
           f"GCN {gcn:.2f} (gap {legnn - gcn:+.2f} >= 3) vs Confidence {conf:.2f}; "
           f"{elapsed:.0f}s")


def test_criterion_6_ablation_ordering(sym50_results):
    results, _ = sym50_results
    full = 100 * results["legnn"].test_accuracy_mean
    no_neg = 100 * results["legnn_no_negative"].test_accuracy_mean
    no_gather = 100 * results["legnn_no_gathering"].test_accuracy_mean
    ok = full >= no_neg >= no_gather
    report(6, ok,
           f"LEGNN {full:.2f} >= w/o negative {no_neg:.2f} >= "
           f"w/o gathering {no_gather:.2f} "
           f"(gaps {full - no_neg:+.2f}, {no_neg - no_gather:+.2f})")


def test_criterion_7_label_quality(sym30_quality):
    l = sym30_quality["legnn"].label_quality
    p = sym30_quality["propagation"].label_quality
    ok = l.f1 > p.f1 and l.precision > p.precision and abs(l.recall - p.recall) <= 0.10
    report(7, ok,
           f"Sym-30% gathered labels: LEGNN P/R/F1 "
           f"{100 * l.precision:.1f}/{100 * l.recall:.1f}/{100 * l.f1:.1f} vs "
           f"Propagation {100 * p.precision:.1f}/{100 * p.recall:.1f}/{100 * p.f1:.1f}")


def _gather_seconds(bundle, mask_iterations, repeats=5):
    g = normalize(bundle.graph)
    model = GcnModel.initialize(bundle.features.shape[1], 64, bundle.num_classes,
                                np.random.default_rng(0))
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        views = bootstrap_views(g, 0.5, mask_iterations, 123)
        gather_labels(model, views, bundle.features)
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def test_criterion_8_overhead_bound():
    bench = gen_sbm(5, 500, 0.006, 0.0005, 32, 2.5, seed=7)  # ~5,000 edges
    cfg = TrainConfig(seed=0, learning_rate=0.2)  # M_e = 15 default
    rep = bench_overhead(bench, cfg)
    ratio = rep["overhead_ratio"]

    small = gen_sbm(5, 500, 0.012, 0.001, 32, 2.5, seed=7)    # ~10k edges
    large = gen_sbm(5, 500, 0.048, 0.004, 32, 2.5, seed=7)    # ~40k edges
    t_small, t_large = _gather_seconds(small, 15), _gather_seconds(large, 15)
    edge_ratio = ((large.graph.nnz - large.num_nodes) /
                  (small.graph.nnz - small.num_nodes))
    edge_scaling = (t_large / t_small) / edge_ratio
    me_scaling = _gather_seconds(small, 30) / _gather_seconds(small, 15)

    ok = ratio <= 3 and 0.5 <= edge_scaling <= 2 and 1.6 <= me_scaling <= 2.4
    report(8, ok,
           f"LEGNN/backbone wall-time ratio {ratio:.2f} (<= 3) on "
           f"{rep['num_edges']}-edge SBM; gathering edge-scaling ratio-of-ratios "
           f"{edge_scaling:.2f} in [0.5, 2]; M_e-doubling ratio {me_scaling:.2f} "
           f"in [1.6, 2.4]")


def test_criterion_9_full_reproduction():
    datasets = [os.path.join(REPO_ROOT, "data", name) for name in ("cora", "citeseer")]
    if not all(os.path.isdir(d) for d in datasets):
        print("\nACCEPTANCE criterion 9: SKIPPED — converted Cora/Citeseer not found "
              "under data/cora and data/citeseer; criteria 1-8 and 10 constitute "
              "acceptance")
        pytest.skip("converted Cora/Citeseer datasets not present")
    targets = {  # Table-scale reference accuracies, tolerance +/- 5 points
        "cora": {"0.2": {"gcn": 68.33, "legnn": 76.21},
                 "0.5": {"gcn": 53.05, "legnn": 70.53}},
        "citeseer": {"0.2": {"gcn": 60.51, "legnn": 71.04},
                     "0.5": {"gcn": 46.78, "legnn": 69.62}},
    }
    failures = []
    for name, path in zip(("cora", "citeseer"), datasets):
        for tau, refs in targets[name].items():
            cfg = {"dataset": path, "train": {}, "seeds": SEEDS,
                   "noise": {"kind": "symmetric", "tau": float(tau)},
                   "methods": ["gcn", "legnn"]}
            for r in run_experiment(cfg):
                got = 100 * r.test_accuracy_mean
                if abs(got - refs[r.method]) > 5:
                    failures.append(f"{name} Sym-{tau}: {r.method} {got:.2f} "
                                    f"vs {refs[r.method]}")
    report(9, not failures, "; ".join(failures) or "all within +/- 5 points")


def test_criterion_10_mask_rate_robustness(mask_rate_sweep):
    full = {k: v for k, v in mask_rate_sweep.items() if k in (0.2, 0.4, 0.6, 0.8)}
    spread = max(full.values()) - min(full.values())
    detail = " ".join(f"K={k}:{v:.1f}" for k, v in sorted(mask_rate_sweep.items()))
    report(10, spread < 5,
           f"Sym-30% accuracy across K: {detail}; spread over "
           f"{{0.2, 0.4, 0.6, 0.8}} = {spread:.2f} (< 5)")


def test_mid_range_mask_rate_example(mask_rate_sweep):
    # companion robustness example: mid-range K varies by < 3 points
    mid = {k: v for k, v in mask_rate_sweep.items() if k in (0.4, 0.5, 0.6)}
    spread = max(mid.values()) - min(mid.values())
    assert spread < 3, f"mid-range mask-rate spread {spread:.2f}"
