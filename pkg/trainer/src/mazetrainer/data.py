"""Dataset plumbing over the planning suite's external artifacts.

Interface contract: map and ground-truth images use the fixed five-color
palette (black obstacle, white free, green promising, red start, blue goal);
the manifest is JSONL with id/m/seed/split/map_path/gt_path records. Class
order everywhere: free=0, promising=1, obstacle=2.
"""

from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torch.utils.data import Dataset

CLASS_FREE = 0
CLASS_PROMISING = 1
CLASS_OBSTACLE = 2

COLOR_OBSTACLE = (0, 0, 0)
COLOR_FREE = (255, 255, 255)
COLOR_PROMISING = (0, 255, 0)
COLOR_START = (255, 0, 0)
COLOR_GOAL = (0, 0, 255)

PALETTE = (COLOR_OBSTACLE, COLOR_FREE, COLOR_PROMISING, COLOR_START, COLOR_GOAL)


class DatasetFormatError(ValueError):
    """Raised for off-palette images or malformed manifests."""


def load_manifest(path) -> list[dict]:
    with open(path) as fh:
        records = [json.loads(line) for line in fh if line.strip()]
    for rec in records:
        for key in ("id", "m", "split", "map_path", "gt_path"):
            if key not in rec:
                raise DatasetFormatError(f"manifest record missing {key!r}: {rec}")
    return records


def decode_rgb(data: bytes) -> np.ndarray:
    rgb = np.asarray(Image.open(io.BytesIO(data)).convert("RGB"))
    flat = rgb.reshape(-1, 3)
    palette = np.array(PALETTE, dtype=np.uint8)
    on_palette = (flat[:, None, :] == palette[None, :, :]).all(axis=2).any(axis=1)
    if not on_palette.all():
        bad = flat[~on_palette][0]
        raise DatasetFormatError(f"off-palette pixel {tuple(int(v) for v in bad)}")
    return rgb


def map_to_tensor(data: bytes) -> torch.Tensor:
    """Map image -> float32 (3, H, W) network input in [0, 1]."""
    rgb = decode_rgb(data)
    return torch.from_numpy(rgb.astype(np.float32) / 255.0).permute(2, 0, 1)


def gt_to_labels(data: bytes) -> torch.Tensor:
    """Ground-truth image -> int64 (H, W) class labels.

    Green marks promising; the start/goal patches sit on labeled path blocks
    and count as promising too. Black is obstacle, white is free.
    """
    rgb = decode_rgb(data)
    labels = np.full(rgb.shape[:2], CLASS_FREE, dtype=np.int64)
    promising = (
        (rgb == COLOR_PROMISING).all(axis=2)
        | (rgb == COLOR_START).all(axis=2)
        | (rgb == COLOR_GOAL).all(axis=2)
    )
    labels[promising] = CLASS_PROMISING
    labels[(rgb == COLOR_OBSTACLE).all(axis=2)] = CLASS_OBSTACLE
    return torch.from_numpy(labels)


def merge_obstacle_into_free(labels: torch.Tensor) -> torch.Tensor:
    """2-class ablation hook: obstacle merges with free."""
    merged = labels.clone()
    merged[merged == CLASS_OBSTACLE] = CLASS_FREE
    return merged


class MazeSegmentationDataset(Dataset):
    """(input tensor, label grid) pairs for one manifest split."""

    def __init__(self, manifest_path, split: str, n_classes: int = 3, limit: int | None = None):
        if n_classes not in (2, 3):
            raise ValueError("n_classes must be 2 or 3")
        self.root = Path(manifest_path).parent
        self.n_classes = n_classes
        self.records = [r for r in load_manifest(manifest_path) if r["split"] == split]
        if limit is not None:
            self.records = self.records[:limit]
        if not self.records:
            raise DatasetFormatError(f"no records for split {split!r}")

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        rec = self.records[i]
        inputs = map_to_tensor((self.root / rec["map_path"]).read_bytes())
        labels = gt_to_labels((self.root / rec["gt_path"]).read_bytes())
        if self.n_classes == 2:
            labels = merge_obstacle_into_free(labels)
        return inputs, labels


def class_weights(dataset, n_classes: int = 3) -> torch.Tensor:
    """Inverse-frequency weights over a dataset's labels, min-normalized to 1.

    w_k = total / (n_classes * count_k); errors when a class never occurs.
    """
    counts = torch.zeros(n_classes, dtype=torch.long)
    for i in range(len(dataset)):
        _, labels = dataset[i]
        counts += torch.bincount(labels.reshape(-1), minlength=n_classes)
    if (counts == 0).any():
        missing = [i for i, c in enumerate(counts.tolist()) if c == 0]
        raise ValueError(f"classes {missing} absent from the dataset")
    w = counts.sum() / (n_classes * counts.double())
    return (w / w.min()).float()
