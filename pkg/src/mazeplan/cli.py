"""Command-line entry points: gen-dataset, oracle, plan, bench, eval-pmap,
eval-batch."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as bench_mod
from . import grid_world, metrics, oracle, region
from .planner import PlannerConfig, plan


def _ints(text):
    return [int(x) for x in text.split(",")]


def gen_dataset_main(argv=None):
    p = argparse.ArgumentParser(
        prog="gen-dataset", description="Generate maze map / ground-truth image datasets."
    )
    p.add_argument("--complexities", type=_ints, default=[31, 33, 35])
    p.add_argument("--per-level", type=int, default=8000)
    p.add_argument("--split", type=_ints, default=[6000, 1000, 1000],
                   help="train,eval,test counts (must sum to per-level)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--canvas", type=int, default=grid_world.DEFAULT_CANVAS)
    p.add_argument("--dilation", type=int, default=0)
    p.add_argument("--overwrite", action="store_true")
    args = p.parse_args(argv)
    records = grid_world.emit_dataset(
        args.complexities, args.per_level, tuple(args.split), args.out, args.seed,
        canvas_px=args.canvas, dilation=args.dilation, overwrite=args.overwrite,
    )
    print(f"wrote {len(records)} samples to {args.out}")


def oracle_main(argv=None):
    p = argparse.ArgumentParser(
        prog="oracle", description="Write the exact ground-truth image for a map image."
    )
    p.add_argument("--map", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dilation", type=int, default=0)
    args = p.parse_args(argv)
    data = Path(args.map).read_bytes()
    wmap = grid_world.decode_map_image(data)
    maze = oracle.maze_from_map(wmap)
    gt = oracle.label_ground_truth(maze, dilation=args.dilation)
    overlay = oracle.promising_mask(maze, gt, wmap.block_px, wmap.width)
    Path(args.out).write_bytes(grid_world.encode_map_image(wmap, overlay=overlay))
    print(f"wrote {args.out}")


def _support_for(wmap, pmap_path=None, use_oracle=False, map_bytes=None, dilation=0):
    if use_oracle:
        rmap = oracle.oracle_region_for_image(map_bytes, dilation=dilation)
    elif pmap_path is not None:
        rmap = region.load_pmap(pmap_path)
    else:
        return None
    return region.build_support(region.classify(rmap), wmap)


def plan_main(argv=None):
    p = argparse.ArgumentParser(prog="plan", description="Plan a path on a map image.")
    p.add_argument("--map", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--pmap", help="region probability file driving the biased sampler")
    group.add_argument("--oracle", action="store_true",
                       help="use the exact ground-truth region instead of a pmap")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--step", type=float, default=6.0)
    p.add_argument("--max-iter", type=int, default=200000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--goal-radius", type=float, default=None,
                   help="default: half the rendered block size")
    p.add_argument("--optimize", action="store_true",
                   help="keep refining until the iteration budget instead of "
                        "returning at the first solution")
    p.add_argument("--backend", choices=("auto", "native", "python"), default="auto")
    p.add_argument("--out", help="write PlanResult JSON here")
    args = p.parse_args(argv)

    map_bytes = Path(args.map).read_bytes()
    wmap = grid_world.decode_map_image(map_bytes)
    support = _support_for(wmap, args.pmap, args.oracle, map_bytes)
    goal_radius = args.goal_radius if args.goal_radius is not None else wmap.block_px / 2.0
    cfg = PlannerConfig(
        step_size=args.step, max_iterations=args.max_iter, alpha=args.alpha,
        goal_radius=goal_radius, rng_seed=args.seed, optimize=args.optimize,
    )
    result = plan(wmap, cfg, region=support, backend=args.backend)
    payload = {
        "success": result.success,
        "iterations_used": result.iterations_used,
        "node_count": result.node_count,
        "path_length": result.path_length,
        "wall_time": result.wall_time_s,
        "biased_iterations": result.biased_iterations,
        "path": [list(pt) for pt in result.path] if result.path else None,
    }
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2))
    print(
        f"success={result.success} iterations={result.iterations_used} "
        f"nodes={result.node_count} length={result.path_length:.2f} "
        f"time={result.wall_time_s:.3f}s"
    )
    return 0 if result.success else 1


def _load_envs(env_dir, region_source, dilation=0):
    env_dir = Path(env_dir)
    maps = sorted(env_dir.glob("*_map.png")) or sorted(env_dir.glob("*.png"))
    if not maps:
        raise SystemExit(f"no map images in {env_dir}")
    envs = []
    for path in maps:
        data = path.read_bytes()
        wmap = grid_world.decode_map_image(data)
        support = None
        if region_source == "oracle":
            support = _support_for(wmap, use_oracle=True, map_bytes=data, dilation=dilation)
        elif region_source is not None:
            stem = path.stem.removesuffix("_map")
            pmap_path = Path(region_source) / f"{stem}.pmap"
            support = _support_for(wmap, pmap_path=pmap_path)
        envs.append(bench_mod.BenchEnv(env_id=path.stem, wmap=wmap, support=support))
    return envs


def bench_main(argv=None):
    p = argparse.ArgumentParser(
        prog="bench", description="Repeated paired planner trials over an environment set."
    )
    p.add_argument("--envs", required=True, help="directory of map images")
    p.add_argument("--planners", default="rrt,lrrt:0.5,lrrt:0.8")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--max-iter", type=int, default=200000)
    p.add_argument("--step", type=float, default=6.0)
    p.add_argument("--goal-radius", type=float, default=None)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--region", default="oracle",
                   help="'oracle' or a directory of .pmap files")
    p.add_argument("--optimize", action="store_true")
    args = p.parse_args(argv)

    planners = bench_mod.parse_planner_spec(args.planners)
    envs = _load_envs(args.envs, args.region)
    goal_radius = args.goal_radius
    if goal_radius is None:
        goal_radius = envs[0].wmap.block_px / 2.0
    cfg = PlannerConfig(
        step_size=args.step, max_iterations=args.max_iter,
        goal_radius=goal_radius, optimize=args.optimize,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows, summaries = bench_mod.run_benchmark(envs, planners, args.trials, args.seed, cfg)
    bench_mod.write_raw_csv(rows, out_dir / "raw.csv")
    bench_mod.write_summary_csv(summaries, out_dir / "summary.csv")
    for s in summaries:
        print(
            f"{s.env} {s.planner}: success={s.success_rate:.2f} "
            f"iters={s.mean_iterations:.0f}±{s.std_iterations:.0f} "
            f"nodes={s.mean_nodes:.0f}±{s.std_nodes:.0f} "
            f"time={s.mean_time_s:.3f}s±{s.std_time_s:.3f}"
        )
    print(f"wrote {out_dir / 'raw.csv'} and {out_dir / 'summary.csv'}")


def eval_pmap_main(argv=None):
    p = argparse.ArgumentParser(
        prog="eval-pmap", description="Score a region prediction against ground truth."
    )
    p.add_argument("--pmap", required=True)
    p.add_argument("--gt", required=True, help="five-color ground-truth image")
    args = p.parse_args(argv)
    rmap = region.load_pmap(args.pmap)
    gt_grid = region.class_grid_from_gt_image(Path(args.gt).read_bytes())
    report = metrics.combined_metric(region.classify(rmap), gt_grid)
    print(
        f"accuracy={report.accuracy:.6f} redundancy={report.redundancy:.6f} "
        f"metric={report.metric:.6f}"
    )


def eval_batch_main(argv=None):
    p = argparse.ArgumentParser(
        prog="eval-batch",
        description="Score a directory of pmap predictions against a dataset manifest.",
    )
    p.add_argument("--manifest", required=True)
    p.add_argument("--pmap-dir", required=True)
    p.add_argument("--report", required=True, help="output CSV path")
    p.add_argument("--split", default=None, help="restrict to one split (e.g. test)")
    args = p.parse_args(argv)

    import csv

    manifest = grid_world.load_manifest(args.manifest)
    base = Path(args.manifest).parent
    pmap_dir = Path(args.pmap_dir)
    per_level: dict[int, list] = {}
    rows = []
    for rec in manifest:
        if args.split and rec["split"] != args.split:
            continue
        pmap_path = pmap_dir / f"{rec['id']}.pmap"
        if not pmap_path.exists():
            continue
        rmap = region.load_pmap(pmap_path)
        gt_grid = region.class_grid_from_gt_image((base / rec["gt_path"]).read_bytes())
        report = metrics.combined_metric(region.classify(rmap), gt_grid)
        rows.append((rec["id"], rec["m"], report.accuracy, report.redundancy, report.metric))
        per_level.setdefault(rec["m"], []).append(report)
    if not rows:
        raise SystemExit("no (pmap, ground truth) pairs found")

    with open(args.report, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "m", "accuracy", "redundancy", "metric"])
        for row in rows:
            writer.writerow(row)
    for m in sorted(per_level):
        reports = per_level[m]
        n = len(reports)
        print(
            f"m={m}: n={n} "
            f"accuracy={sum(r.accuracy for r in reports) / n:.4f} "
            f"redundancy={sum(r.redundancy for r in reports) / n:.4f} "
            f"metric={sum(r.metric for r in reports) / n:.4f}"
        )
    print(f"wrote {args.report}")


if __name__ == "__main__":
    sys.exit("use the installed console scripts (gen-dataset, oracle, plan, ...)")
