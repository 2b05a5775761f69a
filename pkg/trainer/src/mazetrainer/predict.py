"""Inference: map image -> soft-maxed PMAP probability file, with latency
instrumentation."""

from __future__ import annotations

import time
from pathlib import Path

import torch
import torch.nn.functional as F

from .data import map_to_tensor
from .pmap import write_pmap


def predict_probs(model, map_bytes: bytes, device: str = "cpu"):
    """Soft-maxed (H, W, K) float32 probabilities plus inference seconds."""
    inputs = map_to_tensor(map_bytes).unsqueeze(0).to(device)
    t0 = time.perf_counter()
    with torch.no_grad():
        scores = model(inputs)
        probs = F.softmax(scores, dim=1)
    seconds = time.perf_counter() - t0
    return probs.squeeze(0).permute(1, 2, 0).cpu().numpy().astype("float32"), seconds


def predict_pmap(model, map_path, out_path, device: str = "cpu", log=print) -> float:
    """Write a PMAP for one map image; returns inference seconds."""
    probs, seconds = predict_probs(model, Path(map_path).read_bytes(), device)
    write_pmap(probs, out_path)
    log(f"{map_path}: {seconds * 1000:.1f} ms ({1.0 / seconds:.1f} FPS) -> {out_path}")
    return seconds
