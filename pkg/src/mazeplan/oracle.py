"""Exact ground truth: shortest block paths and promising-region labels.

Breadth-first search over free blocks with a fixed neighbor order gives a
deterministic shortest path; the promising region is that path (optionally
dilated within free space), rasterized to pixels. A one-hot RegionMap built
from it lets the planner suite run with no learned component at all.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .grid_world import GridMaze, WorkspaceMap, decode_map_image, rasterize
from .region import CLASS_FREE, CLASS_OBSTACLE, CLASS_PROMISING, RegionMap

# Fixed tie-break order: up, right, down, left.
NEIGHBOR_ORDER = ((-1, 0), (0, 1), (1, 0), (0, -1))


class UnreachableError(RuntimeError):
    """No free 4-connected path between the requested blocks."""


@dataclass(frozen=True)
class GroundTruth:
    """Exact promising-region label for one maze instance."""

    path_blocks: tuple[tuple[int, int], ...]
    promising_blocks: frozenset[tuple[int, int]]
    dilation: int = 0


def _bfs_parents(maze: GridMaze, source, target=None):
    """BFS over free blocks; returns (parents, distances)."""
    m = maze.m
    parent = {source: None}
    dist = {source: 0}
    queue = deque([source])
    while queue:
        r, c = queue.popleft()
        if target is not None and (r, c) == target:
            break
        for dr, dc in NEIGHBOR_ORDER:
            nb = (r + dr, c + dc)
            if 0 <= nb[0] < m and 0 <= nb[1] < m and nb not in parent and not maze.cells[nb]:
                parent[nb] = (r, c)
                dist[nb] = dist[(r, c)] + 1
                queue.append(nb)
    return parent, dist


def block_distance(maze: GridMaze, a, b) -> int | None:
    """BFS distance between blocks a and b, or None when disconnected."""
    _, dist = _bfs_parents(maze, tuple(a), tuple(b))
    return dist.get(tuple(b))


def shortest_block_path(maze: GridMaze) -> list[tuple[int, int]]:
    """Deterministic shortest free path from start_block to goal_block."""
    if maze.start_block is None or maze.goal_block is None:
        raise ValueError("maze has no endpoints")
    if maze.cells[maze.start_block] or maze.cells[maze.goal_block]:
        raise ValueError("start or goal block is an obstacle")
    parent, _ = _bfs_parents(maze, maze.start_block, maze.goal_block)
    if maze.goal_block not in parent:
        raise UnreachableError("goal block unreachable from start block")
    path = [maze.goal_block]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def label_ground_truth(maze: GridMaze, dilation: int = 0) -> GroundTruth:
    """Promising blocks = shortest path dilated within free space."""
    path = shortest_block_path(maze)
    promising = set(path)
    for _ in range(dilation):
        grown = set(promising)
        for r, c in promising:
            for dr, dc in NEIGHBOR_ORDER:
                nb = (r + dr, c + dc)
                if 0 <= nb[0] < maze.m and 0 <= nb[1] < maze.m and not maze.cells[nb]:
                    grown.add(nb)
        promising = grown
    return GroundTruth(
        path_blocks=tuple(path), promising_blocks=frozenset(promising), dilation=dilation
    )


def promising_mask(maze: GridMaze, gt: GroundTruth, block_px: int, canvas_px: int) -> np.ndarray:
    """Rasterize promising blocks to a boolean pixel mask."""
    blocks = np.zeros((maze.m, maze.m), dtype=bool)
    for r, c in gt.promising_blocks:
        blocks[r, c] = True
    extent = maze.m * block_px
    pad = (canvas_px - extent) // 2
    mask = np.zeros((canvas_px, canvas_px), dtype=bool)
    mask[pad : pad + extent, pad : pad + extent] = np.kron(
        blocks, np.ones((block_px, block_px), dtype=bool)
    )
    return mask


def oracle_region(
    maze: GridMaze, block_px: int, canvas_px: int | None = None, dilation: int = 0
) -> RegionMap:
    """One-hot RegionMap: promising on the ground-truth pixels, obstacle on
    obstacle pixels (padding included), free elsewhere."""
    wmap = rasterize(maze, block_px, canvas_px)
    gt = label_ground_truth(maze, dilation=dilation)
    mask = promising_mask(maze, gt, block_px, wmap.width)
    probs = np.zeros((wmap.height, wmap.width, 3), dtype=np.float32)
    labels = np.full((wmap.height, wmap.width), CLASS_FREE, dtype=np.int64)
    labels[mask] = CLASS_PROMISING
    labels[wmap.occupancy] = CLASS_OBSTACLE
    rows, cols = np.indices(labels.shape)
    probs[rows, cols, labels] = 1.0
    return RegionMap(probs=probs)


def infer_grid(wmap: WorkspaceMap) -> tuple[int, int, int]:
    """Recover (m, block_px, pad) from a rasterized generator map.

    Valid for images produced by this suite: the start patch gives block_px
    and the corner lattice blocks are always free, so the minimum free-pixel
    coordinate equals the padding width.
    """
    bpx = wmap.block_px
    free_rows, free_cols = np.nonzero(~wmap.occupancy)
    pad = int(min(free_rows.min(), free_cols.min()))
    m = (wmap.width - 2 * pad) // bpx
    if pad + m * bpx + pad != wmap.width:
        raise ValueError("cannot infer block grid from this map")
    return m, bpx, pad


def maze_from_map(wmap: WorkspaceMap) -> GridMaze:
    """Rebuild the block-level maze from a rasterized map image."""
    m, bpx, pad = infer_grid(wmap)
    centers = pad + np.arange(m) * bpx + bpx // 2
    cells = wmap.occupancy[np.ix_(centers, centers)].copy()

    def to_block(px):
        x, y = px
        return (int((y - pad) // bpx), int((x - pad) // bpx))

    return GridMaze(
        m=m, cells=cells, start_block=to_block(wmap.start_px), goal_block=to_block(wmap.goal_px)
    )


def oracle_region_for_image(map_bytes: bytes, dilation: int = 0) -> RegionMap:
    """Oracle RegionMap for a map image produced by this suite."""
    wmap = decode_map_image(map_bytes)
    maze = maze_from_map(wmap)
    _, bpx, _ = infer_grid(wmap)
    return oracle_region(maze, bpx, wmap.width, dilation=dilation)
