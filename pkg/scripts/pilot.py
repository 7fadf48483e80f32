"""Pilot run of every acceptance configuration on an independent seed.

Prints estimates and wall times; the thresholds in
tests/fixtures/acceptance.json were checked against this output.

    python scripts/pilot.py [--seed 12345] [--scale 1.0]
"""
import argparse
import time

import numpy as np

from noisyperc.counterexample import CounterexampleConfig, bridging_probability, build_X, \
    resolve_b_flags, sample_activations
from noisyperc.experiments import (ExperimentConfig, check_one_dependence, estimate_dual_cluster_size,
                                   estimate_dual_pairwise, estimate_ek_decay, estimate_marginal_an,
                                   pc_thinning_samples, run_connectivity, run_halfplane)
from noisyperc.generators import GeneratorSpec, is_everywhere_percolating
from noisyperc.lattice import LatticeWindow


def timed(label, fn):
    t = time.time()
    out = fn()
    print(f"--- {label}: {time.time() - t:.1f}s")
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=12345)
    ap.add_argument("--scale", type=float, default=1.0, help="multiplier on replicate counts")
    a = ap.parse_args()
    R = lambda n: max(10, int(n * a.scale))  # noqa: E731
    fol = GeneratorSpec("foliation_horizontal")
    tree = GeneratorSpec("spanning_tree", seed=a.seed)

    recs = timed("dual pairwise", lambda: estimate_dual_pairwise(ExperimentConfig(
        "dual_pairwise", fol, 64, 64, epsilon=0.3, scales=range(1, 9), replicates=R(10000), seed=a.seed)))
    for r in recs:
        print(f"k={r.param_value:.0f} est={r.estimate:.4f} se={r.stderr:.4f} bound={r.bound:.4f}")

    r = timed("dual cluster size", lambda: estimate_dual_cluster_size(ExperimentConfig(
        "dual_cluster_size", fol, 128, 128, epsilon=0.5, replicates=R(10000), seed=a.seed)))
    print(f"mean={r.estimate:.4f} se={r.stderr:.4f} bound={r.bound}")

    cfg = ExperimentConfig("ek_decay", fol, 64, 64, epsilon=0.3, scales=(4, 8, 16, 32),
                           replicates=R(10000), seed=a.seed)
    fit = timed("E_k decay", lambda: estimate_ek_decay(cfg))
    print(f"slope={fit.slope:.4f} excluded={fit.excluded}",
          [f"{x.estimate:.5f}" for x in fit.records])

    cfg = ExperimentConfig("marginal_an", fol, 128, 128, epsilon=0.3, scales=(4, 8, 16, 32),
                           replicates=R(10000), seed=a.seed)
    recs = timed("A_n marginals", lambda: estimate_marginal_an(cfg))
    print([f"n={x.param_value:.0f}: {x.estimate:.4f}+-{x.stderr:.4f}" for x in recs])

    cfg = ExperimentConfig("one_dependence", fol, 64, 64, epsilon=0.3, scales=(8,),
                           replicates=R(10000), seed=a.seed)
    rep = timed("1-dependence", lambda: check_one_dependence(cfg))
    z = [rep.cov[i, j] / rep.se[i, j] if rep.se[i, j] > 0 else 0.0 for i, j in rep.tested_pairs()]
    print(f"{len(z)} pairs, max |cov/se| = {np.max(np.abs(z)):.2f}")

    r = timed("connectivity", lambda: run_connectivity(ExperimentConfig(
        "connectivity", tree, 128, 128, epsilon=0.25, replicates=R(1000), seed=a.seed)))
    print(f"fraction={r.estimate:.4f}")

    cfg = ExperimentConfig("pc_thinning", tree, 256, 256, epsilon=0.25, scales=(0.9, 0.95, 0.98, 0.999),
                           replicates=R(1000), seed=a.seed)
    s = timed("pc thinning", lambda: pc_thinning_samples(cfg))
    print("crossing by q:", s.mean(axis=0), "pathwise monotone:", bool(np.all(np.diff(s, axis=1) >= 0)))

    r = timed("half-plane", lambda: run_halfplane(ExperimentConfig(
        "halfplane", GeneratorSpec("foliation_vertical"), 256, 128, "half_plane", epsilon=0.3,
        replicates=R(1000), seed=a.seed)))
    print(f"fraction={r.estimate:.4f}")

    for n in (3, 4, 5, 6):
        b = timed(f"bridging n={n}", lambda: bridging_probability(n, 0.3, R(10000), a.seed))
        print(f"n={n} cut={b.estimate:.4f}+-{b.stderr:.4f} thread={b.estimate_thread:.4f}")
    window = LatticeWindow(64, 64)
    carved = ok = 0
    for s in range(100):
        cfg = CounterexampleConfig(window, 6, seed=a.seed + s)
        acts = resolve_b_flags(sample_activations(cfg))
        carved += sum(x.b_flag for x in acts)
        ok += is_everywhere_percolating(build_X(cfg, acts))
    print(f"build_X everywhere percolating {ok}/100, carved annuli {carved}")


if __name__ == "__main__":
    main()
