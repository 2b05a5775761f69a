"""Per-pixel class-probability fields, the PMAP file format, and the
biased sampler feeding the planner.

Class order is fixed across the whole suite: free=0, promising=1,
obstacle=2. PMAP is the binary exchange format between the trainer and the
planner: little-endian header "PMAP", version, height, width, n_classes,
then float32 probabilities row-major with class fastest-varying.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .grid_world import WorkspaceMap
from .rng import SplitMix64

CLASS_FREE = 0
CLASS_PROMISING = 1
CLASS_OBSTACLE = 2
CLASS_NAMES = ("free", "promising", "obstacle")

PMAP_MAGIC = b"PMAP"
PMAP_VERSION = 1
NORMALIZATION_TOL = 1e-5


class PmapFormatError(ValueError):
    """Raised for malformed PMAP payloads."""


class EmptySupportError(RuntimeError):
    """No promising free pixel to sample from; fall back to uniform."""


@dataclass(frozen=True)
class RegionMap:
    """height x width x n_classes probability field (float32)."""

    probs: np.ndarray

    def __post_init__(self):
        p = self.probs
        if p.ndim != 3:
            raise ValueError(f"probs must be 3-d, got shape {p.shape}")
        if p.dtype != np.float32:
            raise ValueError("probs must be float32")
        if p.min() < 0.0 or p.max() > 1.0:
            raise ValueError("probabilities out of [0, 1]")
        sums = p.sum(axis=2, dtype=np.float64)
        if np.abs(sums - 1.0).max() > NORMALIZATION_TOL:
            raise ValueError("per-pixel probabilities do not sum to 1")
        p.setflags(write=False)

    @property
    def height(self):
        return self.probs.shape[0]

    @property
    def width(self):
        return self.probs.shape[1]

    @property
    def n_classes(self):
        return self.probs.shape[2]


@dataclass(frozen=True)
class ClassGrid:
    """Hard per-pixel class labels."""

    labels: np.ndarray  # (height, width) integer

    def __post_init__(self):
        if self.labels.ndim != 2:
            raise ValueError("labels must be 2-d")
        self.labels.setflags(write=False)

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def width(self):
        return self.labels.shape[1]


def save_pmap(region: RegionMap, path) -> None:
    header = struct.pack(
        "<4sIIII", PMAP_MAGIC, PMAP_VERSION, region.height, region.width, region.n_classes
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(region.probs, dtype="<f4").tobytes())


def load_pmap(path) -> RegionMap:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 20:
        raise PmapFormatError("truncated header")
    magic, version, h, w, k = struct.unpack("<4sIIII", data[:20])
    if magic != PMAP_MAGIC:
        raise PmapFormatError(f"bad magic {magic!r}")
    if version != PMAP_VERSION:
        raise PmapFormatError(f"unsupported version {version}")
    expected = 20 + h * w * k * 4
    if len(data) != expected:
        raise PmapFormatError(f"payload size {len(data)} != expected {expected}")
    probs = np.frombuffer(data[20:], dtype="<f4").reshape(h, w, k).copy()
    try:
        return RegionMap(probs=probs)
    except ValueError as exc:
        raise PmapFormatError(str(exc)) from exc


def classify(region: RegionMap) -> ClassGrid:
    """Per-pixel argmax; ties resolve to the lowest class index."""
    return ClassGrid(labels=np.argmax(region.probs, axis=2))


def one_hot(grid: ClassGrid, n_classes: int = 3) -> RegionMap:
    probs = np.zeros((grid.height, grid.width, n_classes), dtype=np.float32)
    rows, cols = np.indices(grid.labels.shape)
    probs[rows, cols, grid.labels] = 1.0
    return RegionMap(probs=probs)


@dataclass(frozen=True)
class SampleSupport:
    """Flat list of promising-pixel (x, y) integer coordinates."""

    pixels: np.ndarray  # (k, 2) int32, columns (x, y)

    def __post_init__(self):
        if len(self.pixels) == 0:
            raise EmptySupportError("support is empty")
        self.pixels.setflags(write=False)

    def __len__(self):
        return len(self.pixels)


def build_support(grid: ClassGrid, wmap: WorkspaceMap) -> SampleSupport:
    """Promising pixels that are actually free in the collision map.

    Predicted-promising pixels on true obstacles are dropped: sampling
    inside obstacles only wastes planner iterations.
    """
    if grid.labels.shape != wmap.occupancy.shape:
        raise ValueError("class grid and map shapes differ")
    mask = (grid.labels == CLASS_PROMISING) & ~wmap.occupancy
    rows, cols = np.nonzero(mask)
    pixels = np.stack([cols, rows], axis=1).astype(np.int32)  # (x, y)
    if len(pixels) == 0:
        raise EmptySupportError("no free promising pixel")
    return SampleSupport(pixels=pixels)


def class_grid_from_gt_image(data: bytes) -> ClassGrid:
    """ClassGrid from a five-color ground-truth image.

    Green and the start/goal patches (which sit on labeled path blocks)
    map to promising, black to obstacle, white to free.
    """
    from .grid_world import decode_map_image, promising_mask_from_image

    wmap = decode_map_image(data)  # validates the palette
    labels = np.full(wmap.occupancy.shape, CLASS_FREE, dtype=np.int64)
    labels[promising_mask_from_image(data)] = CLASS_PROMISING
    labels[wmap.occupancy] = CLASS_OBSTACLE
    return ClassGrid(labels=labels)


def sample_biased(support: SampleSupport, rng: SplitMix64) -> tuple[float, float]:
    """Uniform pixel choice plus uniform jitter inside the unit pixel square."""
    i = rng.randint(len(support))
    px, py = support.pixels[i]
    return (float(px) + rng.random(), float(py) + rng.random())
