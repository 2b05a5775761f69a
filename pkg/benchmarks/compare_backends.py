#!/usr/bin/env python3
"""Timing comparison of the compiled planner core against the pure-Python
reference.

Both backends run the identical algorithm on the identical RNG stream, so
results are bit-identical; this script verifies that on each run and reports
the speedup. Usage:

    python benchmarks/compare_backends.py [--m 25] [--envs 3] [--trials 3]
"""

import argparse
import statistics
import time

import numpy as np

from mazeplan.grid_world import default_block_px, generate_maze, place_endpoints, rasterize
from mazeplan.oracle import oracle_region
from mazeplan.planner import HAVE_NATIVE, PlannerConfig, plan
from mazeplan.region import build_support, classify
from mazeplan.rng import derive_seed


def make_env(m, index):
    maze = place_endpoints(
        generate_maze(m, derive_seed("backend-bench", m, index)),
        derive_seed("backend-bench-ep", m, index),
    )
    bpx = default_block_px(m)
    wmap = rasterize(maze, bpx)
    support = build_support(classify(oracle_region(maze, bpx, wmap.width)), wmap)
    return wmap, support


def run(wmap, support, alpha, seed, max_iter, backend):
    cfg = PlannerConfig(
        step_size=6.0, max_iterations=max_iter, alpha=alpha,
        goal_radius=wmap.block_px / 2.0, rng_seed=seed,
    )
    t0 = time.perf_counter()
    result = plan(wmap, cfg, region=support if alpha > 0 else None, backend=backend)
    return result, time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m", type=int, default=25, help="maze complexity")
    parser.add_argument("--envs", type=int, default=3)
    parser.add_argument("--trials", type=int, default=3, help="trials per env and planner")
    parser.add_argument("--max-iter", type=int, default=200_000)
    args = parser.parse_args()

    if not HAVE_NATIVE:
        raise SystemExit("compiled extension not built; nothing to compare")

    speedups = []
    for e in range(args.envs):
        wmap, support = make_env(args.m, e)
        for alpha, label in ((0.0, "rrt"), (0.8, "lrrt:0.8")):
            for t in range(args.trials):
                seed = derive_seed("backend-trial", e, label, t)
                nat, t_nat = run(wmap, support, alpha, seed, args.max_iter, "native")
                py, t_py = run(wmap, support, alpha, seed, args.max_iter, "python")

                assert py.success == nat.success
                assert py.iterations_used == nat.iterations_used
                assert py.path == nat.path
                n = py.tree.n
                assert np.array_equal(py.tree._cost[:n], nat.tree._cost[:n])

                speedups.append(t_py / t_nat)
                print(
                    f"m={args.m} env={e} {label:9s} trial={t} "
                    f"iters={nat.iterations_used:6d} nodes={nat.node_count:6d} "
                    f"native={t_nat:7.3f}s python={t_py:7.3f}s "
                    f"speedup={t_py / t_nat:6.1f}x  (bit-identical: yes)"
                )
    print(
        f"\nmedian speedup {statistics.median(speedups):.1f}x over "
        f"{len(speedups)} paired runs (min {min(speedups):.1f}x, max {max(speedups):.1f}x)"
    )


if __name__ == "__main__":
    main()
