"""Acceptance criteria at full scale. Thresholds live in fixtures/acceptance.json.

Run alone with ``pytest -m acceptance -s`` to see the PASS/FAIL lines as they
are produced; they are also repeated in the terminal summary.
"""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from acceptance_log import report
from noisyperc.counterexample import CounterexampleConfig, bridging_probability, build_X
from noisyperc.duality import UnclosableWalk, boundary_walk_path, dual_bbox_within, has_dual_cycle, to_dual, \
    walk_component
from noisyperc.experiments import (ExperimentConfig, an_samples, check_one_dependence, emit_results,
                                   estimate_dual_cluster_size, estimate_dual_pairwise, estimate_ek_decay,
                                   pc_thinning_samples, run_connectivity, run_experiment, run_halfplane)
from noisyperc.generators import KINDS, GeneratorSpec, generate, is_everywhere_percolating
from noisyperc.lattice import EdgeSet, LatticeWindow, Vertex, box_region, edge_between
from noisyperc.montecarlo import mean_se
from noisyperc.percolation import BernoulliParams, add_bernoulli, clusters
from oracles import adjacency, bfs_components, is_y_path, same_partition, vertices_row_major

pytestmark = pytest.mark.acceptance

THRESHOLDS = json.loads((Path(__file__).parent / "fixtures" / "acceptance.json").read_text())
SEED = THRESHOLDS["seed"]
FOL = GeneratorSpec("foliation_horizontal")
TREE = GeneratorSpec("spanning_tree", seed=SEED)


def timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def test_ac01_dual_forest():
    s = THRESHOLDS["dual_forest"]
    window = LatticeWindow(s["window"], s["window"])

    def run():
        cycles = 0
        for kind in KINDS:
            for seed in range(s["seeds"]):
                cycles += has_dual_cycle(to_dual(generate(GeneratorSpec(kind, 1 + seed % 4, seed), window)))
        return cycles

    cycles, dt = timed(run)
    n = len(KINDS) * s["seeds"]
    ok = cycles == 0 and dt <= s["budget_s"]
    assert report("AC1 dual forest", ok, f"{n - cycles}/{n} acyclic duals, {dt:.1f}s (budget {s['budget_s']}s)")


def test_ac02_dual_pairwise_bound():
    s = THRESHOLDS["dual_pairwise"]
    c = ExperimentConfig("dual_pairwise", FOL, s["window"], s["window"], epsilon=s["epsilon"],
                         scales=s["distances"], replicates=s["replicates"], seed=SEED)
    recs, dt = timed(lambda: estimate_dual_pairwise(c))
    worst = max(r.estimate - r.bound - s["n_se"] * r.stderr for r in recs)
    ok = worst <= 0 and dt <= s["budget_s"]
    detail = ", ".join(f"k={r.param_value:.0f}: {r.estimate:.4f} vs {r.bound:.4f}" for r in recs)
    assert report("AC2 dual pairwise bound", ok, f"{detail}; max excess over bound+3SE {worst:.4f}; {dt:.1f}s")


def test_ac03_dual_cluster_size():
    s = THRESHOLDS["dual_cluster_size"]
    series = 1 + 4 * sum(k * (1 - s["epsilon"]) ** k for k in range(1, 10000))
    c = ExperimentConfig("dual_cluster_size", FOL, s["window"], s["window"], epsilon=s["epsilon"],
                         replicates=s["replicates"], seed=SEED)
    r, dt = timed(lambda: estimate_dual_cluster_size(c))
    ok = (math.isclose(series, s["bound"], rel_tol=1e-9) and r.bound == s["bound"]
          and r.estimate <= s["bound"] + s["n_se"] * r.stderr and dt <= s["budget_s"])
    assert report("AC3 dual cluster size", ok,
                  f"mean {r.estimate:.4f} (SE {r.stderr:.4f}) <= {s['bound']} (series sum {series:.6f}); {dt:.1f}s")


def test_ac04_ek_decay():
    s = THRESHOLDS["ek_decay"]
    c = ExperimentConfig("ek_decay", FOL, s["window"], s["window"], epsilon=s["epsilon"], scales=s["k"],
                         replicates=s["replicates"], seed=SEED)
    fit, dt = timed(lambda: estimate_ek_decay(c))
    est = [r.estimate for r in fit.records]
    ok = (fit.slope < 0 and all(b <= a for a, b in zip(est, est[1:]))
          and est[3] < est[1] * s["ratio_32_over_8"] and dt <= s["budget_s"])
    assert report("AC4 E_k decay", ok,
                  f"P(E_k) {['%.5f' % e for e in est]}, slope {fit.slope:.4f}, excluded {fit.excluded}; {dt:.1f}s")


def _walk_instances(count, window, rng):
    """(Y, x, y) with Y = X + noise, xy absent and its dual component away from the boundary."""
    out = []
    while len(out) < count:
        kind = KINDS[len(out) % len(KINDS)]
        X = generate(GeneratorSpec(kind, int(rng.integers(1, 4)), int(rng.integers(2 ** 31))), window)
        eps = float(rng.uniform(0.1, 0.7))
        Y = add_bernoulli(X, BernoulliParams(epsilon=eps, seed=int(rng.integers(2 ** 31))))
        x = Vertex(int(rng.integers(1, window.width - 1)), int(rng.integers(1, window.height - 1)))
        d = [(1, 0), (0, 1), (-1, 0), (0, -1)][int(rng.integers(4))]
        y = Vertex(x.x + d[0], x.y + d[1])
        if not window.contains(y) or Y.bits[edge_between(window, x, y)]:
            continue
        try:
            lab, t = walk_component(Y, x, y)
        except UnclosableWalk:
            continue  # boundary edge
        if lab.touches_boundary(t):
            continue
        out.append((Y, x, y, lab.bbox[t]))
    return out


def test_ac05_boundary_walk():
    s = THRESHOLDS["boundary_walk"]
    window = LatticeWindow(s["window"], s["window"])
    rng = np.random.default_rng(SEED)
    valid = local = checks = 0
    instances = _walk_instances(s["instances"], window, rng)
    for Y, x, y, bbox in instances:
        try:
            path = boundary_walk_path(Y, x, y)
        except UnclosableWalk:
            continue
        if path[0] == x and path[-1] == y and is_y_path(Y, path):
            valid += 1
        good = True
        for k in range(1, 2 * s["window"]):
            if dual_bbox_within(bbox, x, k - 1):
                checks += 1
                box = box_region(window, x, k)
                good &= all(v in box for v in path)
        local += good
    n = len(instances)
    ok = valid == n and local == n
    assert report("AC5 boundary walk", ok,
                  f"{valid}/{n} Y-valid paths, {local}/{n} inside Lambda(x,k) ({checks} containment checks)")


def test_ac06_marginal_an():
    s = THRESHOLDS["marginal_an"]
    c = ExperimentConfig("marginal_an", FOL, s["window"], s["window"], epsilon=s["epsilon"], scales=s["n"],
                         replicates=s["replicates"], seed=SEED)
    samples, dt = timed(lambda: an_samples(c))
    mean, se = mean_se(samples)
    trend = all(mean[i + 1] >= mean[i] - s["n_se"] * math.hypot(se[i], se[i + 1]) for i in range(len(mean) - 1))
    ok = trend and mean[-1] >= s["min_a32"] and dt <= s["budget_s"]
    assert report("AC6 renormalized marginals", ok,
                  f"P(A_n) {['%.4f' % m for m in mean]} (n={s['n']}), A_32 >= {s['min_a32']}; {dt:.1f}s")


def test_ac07_one_dependence():
    s = THRESHOLDS["one_dependence"]
    c = ExperimentConfig("one_dependence", FOL, s["window"], s["window"], epsilon=s["epsilon"],
                         scales=(s["n"],), replicates=s["replicates"], seed=SEED)
    rep = check_one_dependence(c)
    pairs = rep.tested_pairs()
    bad = [(i, j) for i, j in pairs if abs(rep.cov[i, j]) > s["n_se"] * rep.se[i, j]]
    z = max(abs(rep.cov[i, j]) / rep.se[i, j] for i, j in pairs if rep.se[i, j] > 0)
    ok = len(pairs) >= s["min_pairs"] and not bad
    assert report("AC7 1-dependence", ok, f"{len(pairs)} vertex-disjoint pairs, {len(bad)} beyond 4 SE, max |cov|/SE {z:.2f}")


def test_ac08_connectivity():
    s = THRESHOLDS["connectivity"]
    c = ExperimentConfig("connectivity", TREE, s["window"], s["window"], epsilon=s["epsilon"],
                         replicates=s["replicates"], seed=SEED)
    r = run_connectivity(c)
    assert report("AC8 connectivity", r.estimate >= s["min_fraction"],
                  f"single-cluster fraction {r.estimate:.4f} >= {s['min_fraction']}")


def test_ac09_pc_thinning():
    s = THRESHOLDS["pc_thinning"]
    c = ExperimentConfig("pc_thinning", TREE, s["window"], s["window"], epsilon=s["epsilon"],
                         scales=s["q_grid"], replicates=s["replicates"], seed=SEED)
    samples = pc_thinning_samples(c)
    frac = samples.mean(axis=0)
    at_q = frac[s["q_grid"].index(s["q"])]
    monotone = bool(np.all(np.diff(samples.astype(int), axis=1) >= 0))
    ok = at_q >= s["min_fraction"] and monotone
    assert report("AC9 p_c < 1 signature", ok,
                  f"crossing fraction {at_q:.4f} at q={s['q']}, by q {[round(float(f), 4) for f in frac]}, pathwise monotone {monotone}")


def test_ac10_halfplane():
    s = THRESHOLDS["halfplane"]
    c = ExperimentConfig("halfplane", GeneratorSpec("foliation_vertical"), s["width"], s["height"], "half_plane",
                         epsilon=s["epsilon"], replicates=s["replicates"], seed=SEED)
    r = run_halfplane(c)
    assert report("AC10 half-plane", r.estimate >= s["min_fraction"],
                  f"crossing fraction {r.estimate:.4f} >= {s['min_fraction']}")


def test_ac11a_bridging_decreases():
    s = THRESHOLDS["counterexample"]
    ests = [bridging_probability(n, s["epsilon"], s["replicates"], SEED) for n in s["n"]]
    decreasing = all(b.estimate < a.estimate - s["n_se"] * math.hypot(a.stderr, b.stderr)
                     for a, b in zip(ests, ests[1:]))
    last = ests[-1].estimate
    ok = decreasing and last < s["max_bridge_n6"]
    detail = ", ".join(f"n={b.scale}: {b.estimate:.4f}+-{b.stderr:.4f}" for b in ests)
    assert report("AC11a bridging decreases", ok, f"{detail}; need strict decrease and n=6 < {s['max_bridge_n6']}")


def test_ac11b_bridging_without_noise():
    s = THRESHOLDS["counterexample"]
    vals = [bridging_probability(n, 0.0, 100, SEED).estimate for n in s["n"]]
    assert report("AC11b bridging at eps=0", all(v == 0.0 for v in vals), f"estimates {vals}")


def test_ac11c_build_x_percolates():
    s = THRESHOLDS["counterexample"]
    window = LatticeWindow(s["build_window"], s["build_window"])
    ok = sum(is_everywhere_percolating(build_X(CounterexampleConfig(window, s["build_n_max"], seed=SEED + i)))
             for i in range(s["build_seeds"]))
    assert report("AC11c build_X everywhere percolating", ok == s["build_seeds"], f"{ok}/{s['build_seeds']} seeds")


def test_ac12_oracle_equivalence():
    s = THRESHOLDS["oracle"]
    window = LatticeWindow(s["window"], s["window"])
    rng = np.random.default_rng(SEED)
    keys = vertices_row_major(window)
    agree = 0
    for _ in range(s["instances"]):
        E = EdgeSet(window, rng.random(window.n_edges) < rng.uniform(0.2, 0.8))
        agree += same_partition(clusters(E).labels, bfs_components(adjacency(E)), keys)
    assert report("AC12 oracle equivalence", agree == s["instances"], f"{agree}/{s['instances']} labelings agree")


def test_ac13_determinism(tmp_path):
    d, cn = THRESHOLDS["dual_pairwise"], THRESHOLDS["connectivity"]
    configs = [
        ExperimentConfig("dual_pairwise", FOL, d["window"], d["window"], epsilon=d["epsilon"],
                         scales=d["distances"], replicates=d["replicates"], seed=SEED),
        ExperimentConfig("connectivity", TREE, cn["window"], cn["window"], epsilon=cn["epsilon"],
                         replicates=cn["replicates"], seed=SEED),
    ]
    same = True
    for c in configs:
        blobs = set()
        for workers in THRESHOLDS["determinism"]["workers"]:
            c.threads = workers
            path = tmp_path / f"{c.experiment}-{workers}.csv"
            emit_results(run_experiment(c), path, c, plot=False)
            blobs.add(path.read_bytes())
        same &= len(blobs) == 1
    assert report("AC13 determinism", same,
                  f"{[c.experiment for c in configs]} byte-identical at workers {THRESHOLDS['determinism']['workers']}")
