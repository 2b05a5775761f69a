import numpy as np
import pytest

from mazeplan.grid_world import GridMaze, generate_maze, place_endpoints


def make_maze(cells, start=None, goal=None):
    """GridMaze from a list of 0/1 rows (1 = obstacle)."""
    arr = np.array(cells, dtype=bool)
    return GridMaze(m=arr.shape[0], cells=arr, start_block=start, goal_block=goal)


def corridor_maze(m=5):
    """Single free corridor along the top row."""
    cells = np.ones((m, m), dtype=bool)
    cells[0, :] = False
    return GridMaze(m=m, cells=cells, start_block=(0, 0), goal_block=(0, m - 1))


@pytest.fixture
def maze25():
    return place_endpoints(generate_maze(25, 42), 7)
