"""Pure-Python planner core: RRT* with an optional region-biased sampler.

This is the reference implementation. The compiled extension in _speedups
runs the identical algorithm (same RNG stream, same arithmetic, same tie
rules) and must produce bit-identical trees; it only exists because the
planning loop dominates runtime at benchmark scale.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..grid_world import WorkspaceMap
from ..region import SampleSupport
from ..rng import SplitMix64

COST_TOL = 1e-9


@dataclass(frozen=True)
class PlannerConfig:
    step_size: float = 6.0
    max_iterations: int = 10000
    alpha: float = 0.0
    goal_radius: float = 4.0
    rewire_radius: float | None = None  # None = 2 * step_size
    rng_seed: int = 0
    collision_resolution: float = 0.5
    optimize: bool = False  # keep iterating past the first solution

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be > 0")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.goal_radius <= 0:
            raise ValueError("goal_radius must be > 0")
        if self.collision_resolution <= 0:
            raise ValueError("collision_resolution must be > 0")
        if self.effective_rewire_radius < self.step_size:
            raise ValueError("rewire_radius must be >= step_size")

    @property
    def effective_rewire_radius(self) -> float:
        return 2.0 * self.step_size if self.rewire_radius is None else self.rewire_radius


class Tree:
    """RRT* search tree backed by growable flat arrays.

    Node 0 is the root (the start); every other node stores its parent index
    and its exact path cost from the root.
    """

    def __init__(self, root: tuple[float, float], capacity: int = 64):
        self._x = np.empty(capacity, dtype=np.float64)
        self._y = np.empty(capacity, dtype=np.float64)
        self._parent = np.empty(capacity, dtype=np.int64)
        self._cost = np.empty(capacity, dtype=np.float64)
        self._x[0], self._y[0] = root
        self._parent[0] = -1
        self._cost[0] = 0.0
        self.n = 1
        self._children: list[list[int]] = [[]]

    @classmethod
    def from_arrays(cls, xs, ys, parent, cost) -> "Tree":
        tree = cls((float(xs[0]), float(ys[0])), capacity=max(len(xs), 1))
        n = len(xs)
        tree._x[:n], tree._y[:n] = xs, ys
        tree._parent[:n], tree._cost[:n] = parent, cost
        tree.n = n
        tree._children = [[] for _ in range(n)]
        for i in range(1, n):
            tree._children[parent[i]].append(i)
        return tree

    def _grow(self):
        cap = len(self._x) * 2
        for name in ("_x", "_y", "_parent", "_cost"):
            arr = getattr(self, name)
            grown = np.empty(cap, dtype=arr.dtype)
            grown[: self.n] = arr[: self.n]
            setattr(self, name, grown)

    def position(self, i) -> tuple[float, float]:
        return (float(self._x[i]), float(self._y[i]))

    def parent(self, i) -> int:
        return int(self._parent[i])

    def cost(self, i) -> float:
        return float(self._cost[i])

    def add(self, x: float, y: float, parent: int) -> int:
        if self.n == len(self._x):
            self._grow()
        i = self.n
        self._x[i], self._y[i] = x, y
        self._parent[i] = parent
        self._cost[i] = self._cost[parent] + math.sqrt(
            (x - self._x[parent]) ** 2 + (y - self._y[parent]) ** 2
        )
        self._children.append([])
        self._children[parent].append(i)
        self.n += 1
        return i

    def reparent(self, i: int, new_parent: int) -> None:
        """Re-hang node i under new_parent and recompute subtree costs."""
        old = int(self._parent[i])
        self._children[old].remove(i)
        self._children[new_parent].append(i)
        self._parent[i] = new_parent
        stack = [i]
        while stack:
            j = stack.pop()
            p = self._parent[j]
            self._cost[j] = self._cost[p] + math.sqrt(
                (self._x[j] - self._x[p]) ** 2 + (self._y[j] - self._y[p]) ** 2
            )
            stack.extend(self._children[j])

    def positions(self) -> np.ndarray:
        return np.stack([self._x[: self.n], self._y[: self.n]], axis=1)


def nearest(tree: Tree, point: tuple[float, float]) -> int:
    """Index of the node closest to point; ties go to the lowest index."""
    if tree.n == 0:
        raise ValueError("empty tree")
    d2 = (tree._x[: tree.n] - point[0]) ** 2 + (tree._y[: tree.n] - point[1]) ** 2
    return int(np.argmin(d2))


class GridIndex:
    """Uniform-grid bucket index for nearest-neighbor queries.

    Must agree exactly with the linear scan, including the lowest-index tie
    rule; the compiled core uses the same ring-search scheme internally.
    """

    def __init__(self, width: float, height: float, cell: float):
        self.cell = float(cell)
        self.ncx = int(width / self.cell) + 1
        self.ncy = int(height / self.cell) + 1
        self.buckets: dict[tuple[int, int], list[int]] = {}
        self.points: list[tuple[float, float]] = []

    def _cell_of(self, x, y):
        cx = min(max(int(x / self.cell), 0), self.ncx - 1)
        cy = min(max(int(y / self.cell), 0), self.ncy - 1)
        return cx, cy

    def insert(self, x: float, y: float) -> int:
        i = len(self.points)
        self.points.append((x, y))
        self.buckets.setdefault(self._cell_of(x, y), []).append(i)
        return i

    def nearest(self, x: float, y: float) -> int:
        if not self.points:
            raise ValueError("empty index")
        cx, cy = self._cell_of(x, y)
        best, best_d2 = -1, math.inf
        max_r = max(self.ncx, self.ncy)
        for r in range(max_r + 1):
            if best >= 0 and r >= 1:
                ring_min = (r - 1) * self.cell
                if ring_min * ring_min > best_d2:
                    break
            for bx in range(cx - r, cx + r + 1):
                for by in range(cy - r, cy + r + 1):
                    if max(abs(bx - cx), abs(by - cy)) != r:
                        continue
                    for i in self.buckets.get((bx, by), ()):
                        px, py = self.points[i]
                        d2 = (px - x) * (px - x) + (py - y) * (py - y)
                        if d2 < best_d2 or (d2 == best_d2 and i < best):
                            best, best_d2 = i, d2
        return best


def steer(x_near, x_rand, step: float) -> tuple[float, float]:
    """Move from x_near toward x_rand by at most step."""
    dx = x_rand[0] - x_near[0]
    dy = x_rand[1] - x_near[1]
    dist = math.sqrt(dx * dx + dy * dy)
    if dist <= step:
        return (x_rand[0], x_rand[1])
    return (x_near[0] + step * dx / dist, x_near[1] + step * dy / dist)


def obstacle_free(wmap: WorkspaceMap, a, b, resolution: float = 0.5) -> bool:
    """True iff segment [a, b], sampled at spacing <= resolution including
    both endpoints, stays inside bounds and on free pixels."""
    if resolution <= 0:
        raise ValueError("resolution must be > 0")
    ax, ay = a
    bx, by = b
    dist = math.sqrt((bx - ax) ** 2 + (by - ay) ** 2)
    steps = max(1, int(math.ceil(dist / resolution)))
    occ = wmap.occupancy
    w, h = wmap.width, wmap.height
    for k in range(steps + 1):
        t = k / steps
        x = ax + (bx - ax) * t
        y = ay + (by - ay) * t
        if x < 0.0 or y < 0.0:
            return False
        ix, iy = int(x), int(y)
        if ix >= w or iy >= h or occ[iy, ix]:
            return False
    return True


def extend_and_rewire(tree: Tree, x_new, wmap: WorkspaceMap, cfg: PlannerConfig) -> int:
    """RRT* extension: best-parent choice within the rewire radius, node
    insertion, then re-parenting of neighbors that strictly improve.

    Caller guarantees a collision-free connection from the nearest node.
    """
    radius = cfg.effective_rewire_radius
    nx, ny = x_new
    d2 = (tree._x[: tree.n] - nx) ** 2 + (tree._y[: tree.n] - ny) ** 2
    neighbors = np.nonzero(d2 <= radius * radius)[0]
    dists = np.sqrt(d2[neighbors])

    best, best_cost = -1, math.inf
    for idx, dist in zip(neighbors, dists):
        through = tree.cost(idx) + dist
        if through < best_cost and obstacle_free(
            wmap, tree.position(idx), x_new, cfg.collision_resolution
        ):
            best, best_cost = int(idx), through
    if best < 0:
        # Unreachable under the stated precondition; fall back to nearest.
        best = nearest(tree, x_new)
    new_idx = tree.add(nx, ny, best)

    new_cost = tree.cost(new_idx)
    for idx, dist in zip(neighbors, dists):
        idx = int(idx)
        if idx == best:
            continue
        if new_cost + dist < tree.cost(idx) and obstacle_free(
            wmap, x_new, tree.position(idx), cfg.collision_resolution
        ):
            tree.reparent(idx, new_idx)
    return new_idx


def extract_path(tree: Tree, goal_node: int) -> list[tuple[float, float]]:
    """Root-to-node point sequence."""
    path = [tree.position(goal_node)]
    i = goal_node
    while tree.parent(i) >= 0:
        i = tree.parent(i)
        path.append(tree.position(i))
    path.reverse()
    return path


def path_length(path) -> float:
    return float(
        sum(
            math.sqrt((b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2)
            for a, b in zip(path, path[1:])
        )
    )


def check_tree(tree: Tree, wmap: WorkspaceMap, cfg: PlannerConfig, tol: float = COST_TOL):
    """Assert the structural tree invariants (debug-mode verification)."""
    n = tree.n
    parent = tree._parent[:n]
    assert parent[0] == -1, "root must have no parent"
    assert (parent[1:] >= 0).all() and (parent[1:] < n).all(), "dangling parent"
    # Acyclicity: walking parents must reach the root within n steps.
    for i in range(n):
        j, hops = i, 0
        while j != 0:
            j = int(parent[j])
            hops += 1
            assert hops <= n, f"cycle through node {i}"
    # Cost consistency.
    px, py = tree._x[parent[1:n]], tree._y[parent[1:n]]
    edge = np.sqrt((tree._x[1:n] - px) ** 2 + (tree._y[1:n] - py) ** 2)
    err = np.abs(tree._cost[1:n] - (tree._cost[parent[1:n]] + edge))
    assert n == 1 or err.max() <= tol, f"cost inconsistency {err.max()}"
    # Edge collision freedom.
    for i in range(1, n):
        assert obstacle_free(
            wmap, tree.position(int(parent[i])), tree.position(i), cfg.collision_resolution
        ), f"edge into node {i} collides"


@dataclass(frozen=True)
class PlanResult:
    success: bool
    path: tuple[tuple[float, float], ...] | None
    iterations_used: int
    node_count: int
    path_length: float
    wall_time_s: float
    biased_iterations: int = 0
    region_fallback: bool = False
    tree: Tree | None = field(default=None, repr=False, compare=False)


def plan_python(
    wmap: WorkspaceMap,
    support: SampleSupport | None,
    cfg: PlannerConfig,
    check_invariants: bool = False,
):
    """Reference planning loop. Returns a PlanResult.

    Per iteration: with probability alpha draw from the biased support,
    otherwise uniformly over the full canvas; nearest -> steer -> collision
    check -> extend/rewire; the first node inside the goal disk ends the run
    unless cfg.optimize keeps refining until the iteration budget.
    """
    rng = SplitMix64(cfg.rng_seed)
    alpha = cfg.alpha if support is not None else 0.0
    sx, sy = wmap.start_px
    gx, gy = wmap.goal_px
    tree = Tree((sx, sy))
    biased = 0
    goal_nodes: list[int] = []
    t0 = time.perf_counter()
    iterations = 0
    for it in range(1, cfg.max_iterations + 1):
        iterations = it
        u = rng.random()
        if u < alpha:
            biased += 1
            i = rng.randint(len(support))
            px, py = support.pixels[i]
            rx = float(px) + rng.random()
            ry = float(py) + rng.random()
        else:
            rx = rng.random() * wmap.width
            ry = rng.random() * wmap.height
        ni = nearest(tree, (rx, ry))
        near_pt = tree.position(ni)
        new_pt = steer(near_pt, (rx, ry), cfg.step_size)
        if not obstacle_free(wmap, near_pt, new_pt, cfg.collision_resolution):
            continue
        new_idx = extend_and_rewire(tree, new_pt, wmap, cfg)
        if check_invariants:
            check_tree(tree, wmap, cfg)
        dgx, dgy = new_pt[0] - gx, new_pt[1] - gy
        if math.sqrt(dgx * dgx + dgy * dgy) <= cfg.goal_radius:
            goal_nodes.append(new_idx)
            if not cfg.optimize:
                break
    wall = time.perf_counter() - t0

    goal_idx = min(goal_nodes, key=tree.cost) if goal_nodes else -1
    return _make_result(tree, goal_idx, iterations, biased, wall, support is None and cfg.alpha > 0)


def _make_result(tree, goal_idx, iterations, biased, wall, fallback) -> PlanResult:
    if goal_idx >= 0:
        path = extract_path(tree, goal_idx)
        return PlanResult(
            success=True,
            path=tuple(path),
            iterations_used=iterations,
            node_count=tree.n,
            path_length=path_length(path),
            wall_time_s=wall,
            biased_iterations=biased,
            region_fallback=fallback,
            tree=tree,
        )
    return PlanResult(
        success=False,
        path=None,
        iterations_used=iterations,
        node_count=tree.n,
        path_length=0.0,
        wall_time_s=wall,
        biased_iterations=biased,
        region_fallback=fallback,
        tree=tree,
    )
