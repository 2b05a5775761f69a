"""Prediction quality: accuracy, redundancy, and the combined metric.

Accuracy is the fraction of ground-truth promising pixels recovered;
redundancy counts ground-truth-free pixels spuriously labeled promising,
normalized by the ground-truth promising count; the combined metric is
(1 - accuracy) + redundancy, lower is better.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

from .data import CLASS_FREE, CLASS_PROMISING


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    redundancy: float
    metric: float


def evaluate(pred_labels: torch.Tensor, gt_labels: torch.Tensor) -> EvalResult:
    if pred_labels.shape != gt_labels.shape:
        raise ValueError("prediction and ground truth shapes differ")
    gt_promising = gt_labels == CLASS_PROMISING
    n_pr = int(gt_promising.sum())
    if n_pr == 0:
        raise ValueError("ground truth has no promising pixels")
    pred_promising = pred_labels == CLASS_PROMISING
    hits = int((pred_promising & gt_promising).sum())
    spurious = int((pred_promising & (gt_labels == CLASS_FREE)).sum())
    acc = hits / n_pr
    red = spurious / n_pr
    return EvalResult(accuracy=acc, redundancy=red, metric=(1.0 - acc) + red)
