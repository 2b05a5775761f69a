"""Benchmark harness: repeated paired trials of uniform vs. region-biased
planning across environments, with CSV output and summary statistics.

Per-trial seeds derive from (base_seed, env_id, planner_label, trial_index)
through the documented derive_seed hash, so every planner sees the same
trial seeds on the same environment and comparisons are paired.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, fields

import numpy as np
from scipy import stats

from .planner import PlannerConfig, plan
from .region import SampleSupport
from .rng import derive_seed

RAW_FIELDS = (
    "planner",
    "env",
    "trial",
    "seed",
    "success",
    "iterations",
    "node_count",
    "wall_time_s",
    "path_length_px",
)

METRIC_COLUMNS = ("iterations", "node_count", "wall_time_s")


@dataclass(frozen=True)
class TrialStats:
    planner: str
    env: str
    trial: int
    seed: int
    success: bool
    iterations: int
    node_count: int
    wall_time_s: float
    path_length_px: float


@dataclass(frozen=True)
class GroupSummary:
    planner: str
    env: str
    trials: int
    success_rate: float
    mean_iterations: float
    std_iterations: float
    mean_nodes: float
    std_nodes: float
    mean_time_s: float
    std_time_s: float


@dataclass(frozen=True)
class BenchEnv:
    env_id: str
    wmap: object  # WorkspaceMap
    support: SampleSupport | None


def run_trial(env: BenchEnv, label: str, alpha: float, seed: int, trial: int,
              base_config: PlannerConfig) -> TrialStats:
    cfg = PlannerConfig(
        step_size=base_config.step_size,
        max_iterations=base_config.max_iterations,
        alpha=alpha,
        goal_radius=base_config.goal_radius,
        rewire_radius=base_config.rewire_radius,
        rng_seed=seed,
        collision_resolution=base_config.collision_resolution,
        optimize=base_config.optimize,
    )
    region = env.support if alpha > 0 else None
    t0 = time.perf_counter()
    result = plan(env.wmap, cfg, region=region)
    wall = time.perf_counter() - t0
    return TrialStats(
        planner=label,
        env=env.env_id,
        trial=trial,
        seed=seed,
        success=result.success,
        iterations=result.iterations_used,
        node_count=result.node_count,
        wall_time_s=wall,
        path_length_px=result.path_length,
    )


def run_benchmark(envs, planners, trials: int, base_seed: int,
                  config: PlannerConfig, on_row=None):
    """Run every (planner, env, trial) combination.

    planners is a list of (label, alpha). Rows for failed planner inputs are
    marked failed rather than aborting the batch. Returns (rows, summaries).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rows = []
    for env in envs:
        for label, alpha in planners:
            for t in range(trials):
                seed = derive_seed(base_seed, env.env_id, label, t)
                try:
                    row = run_trial(env, label, alpha, seed, t, config)
                except Exception:
                    row = TrialStats(
                        planner=label, env=env.env_id, trial=t, seed=seed,
                        success=False, iterations=0, node_count=0,
                        wall_time_s=0.0, path_length_px=0.0,
                    )
                rows.append(row)
                if on_row is not None:
                    on_row(row)
    return rows, summarize(rows)


def summarize(rows) -> list[GroupSummary]:
    """Per (planner, env) means and population standard deviations."""
    groups: dict[tuple[str, str], list[TrialStats]] = {}
    for row in rows:
        groups.setdefault((row.planner, row.env), []).append(row)
    out = []
    for (planner, env), group in sorted(groups.items()):
        iters = np.array([r.iterations for r in group], dtype=float)
        nodes = np.array([r.node_count for r in group], dtype=float)
        times = np.array([r.wall_time_s for r in group], dtype=float)
        out.append(
            GroupSummary(
                planner=planner,
                env=env,
                trials=len(group),
                success_rate=sum(r.success for r in group) / len(group),
                mean_iterations=float(iters.mean()),
                std_iterations=float(iters.std()),
                mean_nodes=float(nodes.mean()),
                std_nodes=float(nodes.std()),
                mean_time_s=float(times.mean()),
                std_time_s=float(times.std()),
            )
        )
    return out


def compare(rows, planner_a: str, planner_b: str, metric: str = "iterations"):
    """Paired comparison of planner_b against planner_a on matched trials.

    Returns (mean ratio b/a, sign-test p-value). Trials are matched by
    (env, trial); mismatched trial sets raise.
    """
    if metric not in METRIC_COLUMNS:
        raise ValueError(f"metric must be one of {METRIC_COLUMNS}")
    a = {(r.env, r.trial): r for r in rows if r.planner == planner_a}
    b = {(r.env, r.trial): r for r in rows if r.planner == planner_b}
    if not a or not b:
        raise ValueError("no rows for one of the planners")
    if set(a) != set(b):
        raise ValueError("trial sets differ; paired comparison needs matched trials")
    keys = sorted(a)
    va = np.array([getattr(a[k], metric) for k in keys], dtype=float)
    vb = np.array([getattr(b[k], metric) for k in keys], dtype=float)
    ratio = float(vb.mean() / va.mean())
    wins_b = int((vb < va).sum())
    wins_a = int((va < vb).sum())
    n = wins_a + wins_b  # ties dropped
    p = 1.0 if n == 0 else float(stats.binomtest(wins_b, n, 0.5).pvalue)
    return ratio, p


def write_raw_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RAW_FIELDS)
        for r in sorted(rows, key=lambda r: (r.env, r.planner, r.trial)):
            writer.writerow(
                [r.planner, r.env, r.trial, r.seed, int(r.success),
                 r.iterations, r.node_count, f"{r.wall_time_s:.6f}",
                 f"{r.path_length_px:.6f}"]
            )


def read_raw_csv(path) -> list[TrialStats]:
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            out.append(
                TrialStats(
                    planner=rec["planner"], env=rec["env"], trial=int(rec["trial"]),
                    seed=int(rec["seed"]), success=bool(int(rec["success"])),
                    iterations=int(rec["iterations"]), node_count=int(rec["node_count"]),
                    wall_time_s=float(rec["wall_time_s"]),
                    path_length_px=float(rec["path_length_px"]),
                )
            )
    return out


def write_summary_csv(summaries, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        cols = [f.name for f in fields(GroupSummary)]
        writer.writerow(cols)
        for s in summaries:
            writer.writerow([getattr(s, c) for c in cols])


def parse_planner_spec(spec: str):
    """'rrt,lrrt:0.5,lrrt:0.8' -> [('rrt', 0.0), ('lrrt:0.5', 0.5), ...]."""
    planners = []
    for token in spec.split(","):
        token = token.strip()
        if token == "rrt":
            planners.append(("rrt", 0.0))
        elif token.startswith("lrrt:"):
            alpha = float(token.split(":", 1)[1])
            if not 0.0 < alpha <= 1.0:
                raise ValueError(f"alpha out of (0, 1] in {token!r}")
            planners.append((token, alpha))
        else:
            raise ValueError(f"unknown planner spec {token!r}")
    return planners
