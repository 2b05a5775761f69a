"""RRT* planner with region-biased sampling.

Two interchangeable backends run the same algorithm on the same RNG stream:
a compiled extension (the default when built) and a pure-Python reference.
plan() dispatches between them; results are bit-identical apart from wall
time.
"""

from __future__ import annotations

import time

import numpy as np

from ..grid_world import WorkspaceMap
from ..region import SampleSupport
from .core import (
    GridIndex,
    PlannerConfig,
    PlanResult,
    Tree,
    check_tree,
    extend_and_rewire,
    extract_path,
    nearest,
    obstacle_free,
    path_length,
    plan_python,
    steer,
)

try:
    from . import _speedups

    HAVE_NATIVE = True
except ImportError:  # extension not built; pure Python still works
    _speedups = None
    HAVE_NATIVE = False

__all__ = [
    "PlannerConfig",
    "PlanResult",
    "Tree",
    "GridIndex",
    "nearest",
    "steer",
    "obstacle_free",
    "extend_and_rewire",
    "extract_path",
    "path_length",
    "check_tree",
    "plan",
    "HAVE_NATIVE",
]

_EMPTY_SUPPORT = np.empty((0, 2), dtype=np.int32)


def _plan_native(wmap: WorkspaceMap, support: SampleSupport | None, cfg: PlannerConfig):
    occ = np.ascontiguousarray(wmap.occupancy, dtype=np.uint8)
    pixels = (
        np.ascontiguousarray(support.pixels, dtype=np.int32)
        if support is not None
        else _EMPTY_SUPPORT
    )
    t0 = time.perf_counter()
    goal_idx, iterations, biased, xs, ys, parent, cost = _speedups.run_plan(
        occ,
        pixels,
        support is not None,
        cfg.alpha,
        wmap.start_px[0],
        wmap.start_px[1],
        wmap.goal_px[0],
        wmap.goal_px[1],
        cfg.goal_radius,
        cfg.step_size,
        cfg.effective_rewire_radius,
        cfg.collision_resolution,
        cfg.rng_seed,
        cfg.max_iterations,
        cfg.optimize,
    )
    wall = time.perf_counter() - t0
    tree = Tree.from_arrays(xs, ys, parent, cost)
    from .core import _make_result

    return _make_result(
        tree, int(goal_idx), int(iterations), int(biased), wall,
        support is None and cfg.alpha > 0,
    )


def plan(
    wmap: WorkspaceMap,
    config: PlannerConfig,
    region: SampleSupport | None = None,
    backend: str = "auto",
    check_invariants: bool = False,
) -> PlanResult:
    """Plan from wmap.start_px to wmap.goal_px.

    region is the biased-sample support; when alpha > 0 and region is None
    (e.g. the support came up empty upstream) the run falls back to pure
    uniform sampling and flags it on the result. check_invariants verifies
    the full tree invariants after every iteration (forces the Python
    backend).
    """
    if backend not in ("auto", "native", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    if not wmap.is_free(*wmap.start_px):
        raise ValueError("start lies inside an obstacle")
    if not wmap.is_free(*wmap.goal_px):
        raise ValueError("goal lies inside an obstacle")

    if check_invariants or backend == "python":
        return plan_python(wmap, region, config, check_invariants=check_invariants)
    if backend == "native" and not HAVE_NATIVE:
        raise RuntimeError("native backend requested but the extension is not built")
    if HAVE_NATIVE:
        return _plan_native(wmap, region, config)
    return plan_python(wmap, region, config)
