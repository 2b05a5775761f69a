"""Block mazes, rasterization, and the five-color RGB map image format.

A maze is an m x m grid of blocks (m odd), each block either free or
obstacle. Mazes are carved with a randomized depth-first backtracker on the
odd-cell lattice, so every generated maze is "perfect": all free cells form
a single 4-connected component.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .rng import SplitMix64, derive_seed

# Bit-exact image palette, one pixel per map pixel.
COLOR_OBSTACLE = (0, 0, 0)
COLOR_FREE = (255, 255, 255)
COLOR_START = (255, 0, 0)
COLOR_GOAL = (0, 0, 255)
COLOR_PROMISING = (0, 255, 0)
PALETTE = (COLOR_OBSTACLE, COLOR_FREE, COLOR_START, COLOR_GOAL, COLOR_PROMISING)

DEFAULT_CANVAS = 256
ENDPOINT_MAX_DRAWS = 1000


class MapFormatError(ValueError):
    """Raised when an image violates the five-color map format."""


@dataclass(frozen=True)
class GridMaze:
    """Block-level maze: cells[r, c] is True for obstacle blocks."""

    m: int
    cells: np.ndarray  # (m, m) bool, read-only
    start_block: tuple[int, int] | None = None
    goal_block: tuple[int, int] | None = None
    seed: int = 0

    def __post_init__(self):
        self.cells.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, GridMaze):
            return NotImplemented
        return (
            self.m == other.m
            and np.array_equal(self.cells, other.cells)
            and self.start_block == other.start_block
            and self.goal_block == other.goal_block
        )

    def free_blocks(self) -> np.ndarray:
        """(k, 2) array of free (row, col) pairs in row-major order."""
        return np.argwhere(~self.cells)


@dataclass(frozen=True)
class WorkspaceMap:
    """Pixel occupancy grid with start/goal; the planner's collision world.

    occupancy[row, col] is True for obstacle pixels. start_px/goal_px are
    continuous (x, y) coordinates (x = column axis) at block centers.
    block_px is carried as rendering metadata and excluded from equality.
    """

    width: int
    height: int
    occupancy: np.ndarray  # (height, width) bool, read-only
    start_px: tuple[float, float]
    goal_px: tuple[float, float]
    block_px: int = field(compare=False, default=1)

    def __post_init__(self):
        self.occupancy.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, WorkspaceMap):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.occupancy, other.occupancy)
            and self.start_px == other.start_px
            and self.goal_px == other.goal_px
        )

    def is_free(self, x: float, y: float) -> bool:
        ix, iy = int(x), int(y)
        if x < 0 or y < 0 or ix >= self.width or iy >= self.height:
            return False
        return not self.occupancy[iy, ix]


def default_block_px(m: int) -> int:
    """Block pixel size fitting a 256-pixel canvas: 8 up to m=31, then shrink."""
    if m <= 31:
        return 8
    return max(2, DEFAULT_CANVAS // m)


def generate_maze(m: int, seed: int) -> GridMaze:
    """Carve a perfect maze of m x m blocks with a randomized backtracker.

    Lattice cells sit at even block indices; walls between visited lattice
    cells are knocked out as the DFS advances. Identical (m, seed) pairs
    produce identical mazes.
    """
    if m % 2 == 0:
        raise ValueError(f"m must be odd, got {m}")
    if not 5 <= m <= 99:
        raise ValueError(f"m must be in [5, 99], got {m}")

    rng = SplitMix64(seed)
    k = (m + 1) // 2  # lattice cells per side
    cells = np.ones((m, m), dtype=bool)  # all obstacle

    start = (rng.randint(k), rng.randint(k))
    cells[2 * start[0], 2 * start[1]] = False
    visited = np.zeros((k, k), dtype=bool)
    visited[start] = True
    stack = [start]
    while stack:
        r, c = stack[-1]
        choices = []
        for dr, dc in ((-1, 0), (0, 1), (1, 0), (0, -1)):
            nr, nc = r + dr, c + dc
            if 0 <= nr < k and 0 <= nc < k and not visited[nr, nc]:
                choices.append((nr, nc))
        if not choices:
            stack.pop()
            continue
        nr, nc = choices[rng.randint(len(choices))]
        visited[nr, nc] = True
        cells[2 * nr, 2 * nc] = False
        cells[r + nr, c + nc] = False  # wall between lattice cells
        stack.append((nr, nc))

    return GridMaze(m=m, cells=cells, seed=seed)


def place_endpoints(maze: GridMaze, seed: int) -> GridMaze:
    """Pick distinct free start/goal blocks, at block-path distance >= m.

    Draws uniform free-cell pairs and rejects pairs closer than m (BFS
    distance through free cells), giving nontrivial instances. A maze with
    exactly two free cells has no alternative pair, so those two are
    returned directly.
    """
    from .oracle import block_distance  # local import to avoid a cycle

    free = maze.free_blocks()
    if len(free) < 2:
        raise ValueError("maze has fewer than 2 free cells")
    rng = SplitMix64(seed)
    if len(free) == 2:
        order = rng.randint(2)
        a, b = free[order], free[1 - order]
        return replace(maze, start_block=tuple(a), goal_block=tuple(b))

    for _ in range(ENDPOINT_MAX_DRAWS):
        a = tuple(free[rng.randint(len(free))])
        b = tuple(free[rng.randint(len(free))])
        if a == b:
            continue
        d = block_distance(maze, a, b)
        if d is not None and d >= maze.m:
            return replace(maze, start_block=a, goal_block=b)
    raise RuntimeError(
        f"no endpoint pair at distance >= {maze.m} after {ENDPOINT_MAX_DRAWS} draws"
    )


def rasterize(maze: GridMaze, block_px: int, canvas_px: int | None = None) -> WorkspaceMap:
    """Expand blocks to block_px x block_px pixel patches on a square canvas.

    When canvas_px exceeds the maze extent the map is centered and the
    surrounding padding is obstacle.
    """
    if block_px < 1:
        raise ValueError("block_px must be >= 1")
    extent = maze.m * block_px
    if canvas_px is None:
        canvas_px = extent
    if canvas_px < extent:
        raise ValueError(f"canvas {canvas_px} smaller than maze extent {extent}")
    if maze.start_block is None or maze.goal_block is None:
        raise ValueError("maze has no endpoints; call place_endpoints first")

    pad = (canvas_px - extent) // 2
    occ = np.ones((canvas_px, canvas_px), dtype=bool)
    occ[pad : pad + extent, pad : pad + extent] = np.kron(
        maze.cells, np.ones((block_px, block_px), dtype=bool)
    )

    def center(block):
        r, c = block
        return (pad + (c + 0.5) * block_px, pad + (r + 0.5) * block_px)

    return WorkspaceMap(
        width=canvas_px,
        height=canvas_px,
        occupancy=occ,
        start_px=center(maze.start_block),
        goal_px=center(maze.goal_block),
        block_px=block_px,
    )


def block_patch_mask(shape, center_px, block_px):
    """Boolean mask of the block_px x block_px patch centered at center_px."""
    cx, cy = center_px
    half = block_px / 2.0
    mask = np.zeros(shape, dtype=bool)
    r0, c0 = int(round(cy - half)), int(round(cx - half))
    mask[max(r0, 0) : r0 + block_px, max(c0, 0) : c0 + block_px] = True
    return mask


def encode_map_image(wmap: WorkspaceMap, overlay: np.ndarray | None = None) -> bytes:
    """Render a WorkspaceMap as PNG bytes in the five-color palette.

    overlay, when given, is a boolean promising-region mask painted green on
    free pixels; start/goal block patches are painted on top.
    """
    rgb = np.empty((wmap.height, wmap.width, 3), dtype=np.uint8)
    rgb[:] = COLOR_FREE
    rgb[wmap.occupancy] = COLOR_OBSTACLE
    if overlay is not None:
        rgb[overlay & ~wmap.occupancy] = COLOR_PROMISING
    rgb[block_patch_mask(wmap.occupancy.shape, wmap.start_px, wmap.block_px)] = COLOR_START
    rgb[block_patch_mask(wmap.occupancy.shape, wmap.goal_px, wmap.block_px)] = COLOR_GOAL

    import io

    buf = io.BytesIO()
    Image.fromarray(rgb, "RGB").save(buf, format="PNG")
    return buf.getvalue()


def _single_region_center(mask: np.ndarray, what: str) -> tuple[float, float, int]:
    """Centroid (x, y) and side length of the unique 4-connected region."""
    labels, count = ndimage.label(mask, structure=[[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    if count != 1:
        raise MapFormatError(f"expected exactly one {what} region, found {count}")
    rows, cols = np.nonzero(mask)
    side = int(rows.max() - rows.min() + 1)
    cx = float(cols.min() + cols.max() + 1) / 2.0
    cy = float(rows.min() + rows.max() + 1) / 2.0
    return cx, cy, side


def decode_map_image(data: bytes) -> WorkspaceMap:
    """Parse five-color PNG bytes back into a WorkspaceMap.

    Rejects off-palette colors and images without exactly one start and one
    goal region. Promising-region green decodes as free space.
    """
    rgb = np.asarray(Image.open(__import__("io").BytesIO(data)).convert("RGB"))
    h, w, _ = rgb.shape

    masks = {color: (rgb == color).all(axis=2) for color in PALETTE}
    covered = np.zeros((h, w), dtype=bool)
    for mask in masks.values():
        covered |= mask
    if not covered.all():
        bad = rgb[~covered][0]
        raise MapFormatError(f"off-palette color {tuple(int(v) for v in bad)}")
    if not masks[COLOR_START].any():
        raise MapFormatError("no start region")
    if not masks[COLOR_GOAL].any():
        raise MapFormatError("no goal region")

    sx, sy, s_side = _single_region_center(masks[COLOR_START], "start")
    gx, gy, _ = _single_region_center(masks[COLOR_GOAL], "goal")
    return WorkspaceMap(
        width=w,
        height=h,
        occupancy=masks[COLOR_OBSTACLE].copy(),
        start_px=(sx, sy),
        goal_px=(gx, gy),
        block_px=s_side,
    )


def promising_mask_from_image(data: bytes) -> np.ndarray:
    """Boolean promising mask from a ground-truth image: green plus the
    start/goal patches (endpoint blocks belong to the labeled path)."""
    rgb = np.asarray(Image.open(__import__("io").BytesIO(data)).convert("RGB"))
    return (
        (rgb == COLOR_PROMISING).all(axis=2)
        | (rgb == COLOR_START).all(axis=2)
        | (rgb == COLOR_GOAL).all(axis=2)
    )


def plan_manifest(complexities, per_level, split, seed):
    """Deterministic sample plan: one record per (complexity, index).

    Pure function of its arguments; emit_dataset writes exactly this plan.
    """
    if sum(split) != per_level:
        raise ValueError(f"split {split} does not sum to per_level {per_level}")
    names = ("train", "eval", "test")
    records = []
    for m in complexities:
        for i in range(per_level):
            if i < split[0]:
                part = names[0]
            elif i < split[0] + split[1]:
                part = names[1]
            else:
                part = names[2]
            sid = f"m{m:03d}_{i:05d}"
            records.append(
                {
                    "id": sid,
                    "m": m,
                    "seed": derive_seed(seed, m, i),
                    "split": part,
                    "map_path": f"{part}/{sid}_map.png",
                    "gt_path": f"{part}/{sid}_gt.png",
                }
            )
    return records


def emit_sample(record, out_dir: Path, canvas_px=DEFAULT_CANVAS, dilation=0):
    """Generate and write one (map, ground-truth) image pair."""
    from .oracle import label_ground_truth, promising_mask

    m, s = record["m"], record["seed"]
    maze = place_endpoints(generate_maze(m, s), derive_seed(s, "endpoints"))
    bpx = default_block_px(m)
    wmap = rasterize(maze, bpx, canvas_px)
    gt = label_ground_truth(maze, dilation=dilation)
    overlay = promising_mask(maze, gt, bpx, canvas_px)
    (out_dir / record["map_path"]).write_bytes(encode_map_image(wmap))
    (out_dir / record["gt_path"]).write_bytes(encode_map_image(wmap, overlay=overlay))


def emit_dataset(
    complexities,
    per_level,
    split,
    out_dir,
    seed,
    canvas_px=DEFAULT_CANVAS,
    dilation=0,
    overwrite=False,
):
    """Write the full dataset (map + ground-truth image pairs) and manifest.

    Returns the manifest records. Layout: out_dir/{train,eval,test}/ plus
    out_dir/manifest.jsonl with one JSON record per sample.
    """
    out_dir = Path(out_dir)
    if out_dir.exists() and any(out_dir.iterdir()):
        if not overwrite:
            raise FileExistsError(f"{out_dir} exists; pass overwrite to replace it")
        shutil.rmtree(out_dir)
    for part in ("train", "eval", "test"):
        (out_dir / part).mkdir(parents=True, exist_ok=True)

    records = plan_manifest(complexities, per_level, split, seed)
    for record in records:
        emit_sample(record, out_dir, canvas_px=canvas_px, dilation=dilation)

    with open(out_dir / "manifest.jsonl", "w") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    return records


def load_manifest(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
