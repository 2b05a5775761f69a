"""PMAP writer: the binary interchange format the planner consumes.

Layout (little-endian): magic "PMAP", u32 version=1, u32 height, u32 width,
u32 n_classes, then float32 probabilities row-major with the class index
fastest-varying. Files are written atomically (temp file + rename) so a
concurrently running planner never reads a partial file.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

PMAP_MAGIC = b"PMAP"
PMAP_VERSION = 1


def write_pmap(probs: np.ndarray, path) -> None:
    """Write an (H, W, K) float32 probability field."""
    if probs.ndim != 3:
        raise ValueError(f"probs must be 3-d, got shape {probs.shape}")
    h, w, k = probs.shape
    payload = struct.pack("<4sIIII", PMAP_MAGIC, PMAP_VERSION, h, w, k)
    payload += np.ascontiguousarray(probs, dtype="<f4").tobytes()
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".pmap.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
