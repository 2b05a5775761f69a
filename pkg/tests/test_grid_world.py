import io
from collections import deque

import numpy as np
import pytest
from PIL import Image

from conftest import make_maze
from mazeplan import grid_world as gw
from mazeplan.rng import derive_seed


def flood_fill_free(cells):
    """Independent flood-fill oracle: free-cell count of the component
    containing the first free cell, plus component count."""
    m = cells.shape[0]
    seen = np.zeros_like(cells, dtype=bool)
    components = 0
    first_size = 0
    for r0 in range(m):
        for c0 in range(m):
            if cells[r0, c0] or seen[r0, c0]:
                continue
            components += 1
            size = 0
            queue = deque([(r0, c0)])
            seen[r0, c0] = True
            while queue:
                r, c = queue.popleft()
                size += 1
                for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                    nr, nc = r + dr, c + dc
                    if 0 <= nr < m and 0 <= nc < m and not cells[nr, nc] and not seen[nr, nc]:
                        seen[nr, nc] = True
                        queue.append((nr, nc))
            if components == 1:
                first_size = size
    return components, first_size


def bfs_distance(cells, a, b):
    m = cells.shape[0]
    dist = {a: 0}
    queue = deque([a])
    while queue:
        cur = queue.popleft()
        if cur == b:
            return dist[cur]
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nb = (cur[0] + dr, cur[1] + dc)
            if 0 <= nb[0] < m and 0 <= nb[1] < m and not cells[nb] and nb not in dist:
                dist[nb] = dist[cur] + 1
                queue.append(nb)
    return None


class TestGenerateMaze:
    def test_small_maze_is_connected(self):
        maze = gw.generate_maze(5, 0)
        components, _ = flood_fill_free(maze.cells)
        assert components == 1

    def test_determinism(self):
        a = gw.generate_maze(31, 42)
        b = gw.generate_maze(31, 42)
        assert np.array_equal(a.cells, b.cells)

    def test_free_count_matches_flood_fill(self):
        maze = gw.generate_maze(31, 42)
        components, size = flood_fill_free(maze.cells)
        assert components == 1
        assert size == int((~maze.cells).sum())

    @pytest.mark.parametrize("m", [4, 3, 101])
    def test_rejects_bad_m(self, m):
        with pytest.raises(ValueError):
            gw.generate_maze(m, 0)

    def test_connectivity_sweep(self):
        # Generator invariant: one free component for 200 random (m, seed) pairs.
        ms = [5, 7, 11, 15, 21, 25, 31, 35, 45, 49]
        for i in range(200):
            m = ms[i % len(ms)]
            maze = gw.generate_maze(m, derive_seed("sweep", i))
            components, _ = flood_fill_free(maze.cells)
            assert components == 1, (m, i)


class TestPlaceEndpoints:
    def test_two_free_cells_forced(self):
        maze = make_maze(
            [
                [0, 0, 1, 1, 1],
                [1, 1, 1, 1, 1],
                [1, 1, 1, 1, 1],
                [1, 1, 1, 1, 1],
                [1, 1, 1, 1, 1],
            ]
        )
        placed = gw.place_endpoints(maze, 3)
        assert {placed.start_block, placed.goal_block} == {(0, 0), (0, 1)}

    def test_determinism(self):
        maze = gw.generate_maze(25, 3)
        a = gw.place_endpoints(maze, 11)
        b = gw.place_endpoints(maze, 11)
        assert (a.start_block, a.goal_block) == (b.start_block, b.goal_block)

    def test_minimum_separation(self):
        for seed in range(5):
            maze = gw.place_endpoints(gw.generate_maze(31, seed), seed + 100)
            d = bfs_distance(maze.cells, maze.start_block, maze.goal_block)
            assert d is not None and d >= 31

    def test_degenerate_maze_fails(self):
        # Two adjacent free cells plus one isolated free cell: no reachable
        # pair is ever >= m apart, so placement must give up.
        maze = make_maze(
            [
                [0, 0, 1, 1, 1],
                [1, 1, 1, 1, 1],
                [1, 1, 1, 1, 1],
                [1, 1, 1, 1, 1],
                [1, 1, 1, 1, 0],
            ]
        )
        with pytest.raises(RuntimeError):
            gw.place_endpoints(maze, 0)


class TestRasterize:
    def test_exact_fit(self):
        maze = gw.place_endpoints(gw.generate_maze(5, 1), 2)
        wmap = gw.rasterize(maze, 8, 40)
        assert wmap.width == wmap.height == 40

    def test_padding_is_centered_obstacle(self):
        maze = gw.place_endpoints(gw.generate_maze(31, 42), 7)
        wmap = gw.rasterize(maze, 8, 256)
        # 256 - 248 = 8 pixels of padding, 4 per side, all obstacle.
        assert wmap.occupancy[:4, :].all() and wmap.occupancy[-4:, :].all()
        assert wmap.occupancy[:, :4].all() and wmap.occupancy[:, -4:].all()

    def test_single_free_block_pixel_count(self):
        cells = np.ones((5, 5), dtype=bool)
        cells[0, 0] = False
        maze = gw.GridMaze(m=5, cells=cells, start_block=(0, 0), goal_block=(0, 0))
        wmap = gw.rasterize(maze, 2)
        assert int((~wmap.occupancy).sum()) == 4

    def test_consistency_with_blocks(self):
        maze = gw.place_endpoints(gw.generate_maze(15, 9), 1)
        bpx, canvas = 4, 72
        wmap = gw.rasterize(maze, bpx, canvas)
        pad = (canvas - 15 * bpx) // 2
        for _ in range(200):
            r, c = np.random.randint(0, canvas, size=2)
            br, bc = (r - pad) // bpx, (c - pad) // bpx
            padded = not (0 <= br < 15 and 0 <= bc < 15)
            expected = True if padded else bool(maze.cells[br, bc])
            assert wmap.occupancy[r, c] == expected

    def test_canvas_too_small(self):
        maze = gw.place_endpoints(gw.generate_maze(31, 42), 7)
        with pytest.raises(ValueError):
            gw.rasterize(maze, 8, 100)


class TestImageCodec:
    def test_round_trip(self):
        for seed in range(5):
            maze = gw.place_endpoints(gw.generate_maze(15, seed), seed)
            wmap = gw.rasterize(maze, 4, 72)
            assert gw.decode_map_image(gw.encode_map_image(wmap)) == wmap

    def test_round_trip_sweep(self):
        for i in range(100):
            m = [5, 11, 21, 31][i % 4]
            maze = gw.place_endpoints(
                gw.generate_maze(m, derive_seed("codec", i)), derive_seed("ep", i)
            )
            wmap = gw.rasterize(maze, 3, 3 * m + (i % 3) * 2)
            assert gw.decode_map_image(gw.encode_map_image(wmap)) == wmap

    def test_hand_built_image(self):
        rgb = np.array(
            [
                [gw.COLOR_OBSTACLE, gw.COLOR_FREE],
                [gw.COLOR_START, gw.COLOR_GOAL],
            ],
            dtype=np.uint8,
        )
        buf = io.BytesIO()
        Image.fromarray(rgb, "RGB").save(buf, format="PNG")
        wmap = gw.decode_map_image(buf.getvalue())
        assert wmap.width == wmap.height == 2
        assert wmap.occupancy.tolist() == [[True, False], [False, False]]
        assert wmap.start_px == (0.5, 1.5)
        assert wmap.goal_px == (1.5, 1.5)

    def test_off_palette_rejected(self):
        rgb = np.full((2, 2, 3), 255, dtype=np.uint8)
        rgb[0, 0] = (255, 0, 0)
        rgb[0, 1] = (0, 0, 255)
        rgb[1, 1] = (128, 128, 128)
        buf = io.BytesIO()
        Image.fromarray(rgb, "RGB").save(buf, format="PNG")
        with pytest.raises(gw.MapFormatError):
            gw.decode_map_image(buf.getvalue())

    def test_missing_endpoints_rejected(self):
        rgb = np.full((2, 2, 3), 255, dtype=np.uint8)
        buf = io.BytesIO()
        Image.fromarray(rgb, "RGB").save(buf, format="PNG")
        with pytest.raises(gw.MapFormatError):
            gw.decode_map_image(buf.getvalue())


class TestEmitDataset:
    def test_small_dataset_counts(self, tmp_path):
        records = gw.emit_dataset([5, 7], 10, (6, 2, 2), tmp_path / "d", seed=1)
        assert len(records) == 20
        assert len(list((tmp_path / "d/train").glob("*_map.png"))) == 12
        assert len(list((tmp_path / "d/eval").glob("*_map.png"))) == 4
        assert len(list((tmp_path / "d/test").glob("*_gt.png"))) == 4
        assert (tmp_path / "d/manifest.jsonl").exists()

    def test_manifest_determinism(self, tmp_path):
        a = gw.emit_dataset([5], 6, (4, 1, 1), tmp_path / "a", seed=9)
        b = gw.emit_dataset([5], 6, (4, 1, 1), tmp_path / "b", seed=9)
        assert a == b
        bytes_a = [(tmp_path / "a" / r["map_path"]).read_bytes() for r in a]
        bytes_b = [(tmp_path / "b" / r["map_path"]).read_bytes() for r in b]
        assert bytes_a == bytes_b

    def test_refuses_overwrite(self, tmp_path):
        gw.emit_dataset([5], 3, (1, 1, 1), tmp_path / "d", seed=1)
        with pytest.raises(FileExistsError):
            gw.emit_dataset([5], 3, (1, 1, 1), tmp_path / "d", seed=1)
        gw.emit_dataset([5], 3, (1, 1, 1), tmp_path / "d", seed=1, overwrite=True)

    def test_bad_split_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            gw.emit_dataset([5], 10, (6, 2, 1), tmp_path / "d", seed=1)
