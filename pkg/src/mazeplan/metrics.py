"""Value-level loss and evaluation formulas.

The combined metric scores a hard prediction against ground truth:
(1 - accuracy) + redundancy, where accuracy is the fraction of ground-truth
promising pixels recovered and redundancy counts ground-truth-free pixels
spuriously labeled promising, normalized by the ground-truth promising
count. Lower is better; a perfect prediction scores 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .region import CLASS_FREE, CLASS_PROMISING, ClassGrid

EQUIVALENCE_TOL = 1e-9


@dataclass(frozen=True)
class LossParams:
    gamma: float = 2.0
    weights: tuple[float, ...] | None = None  # per class; None = all ones

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.weights is not None and any(
            not np.isfinite(w) or w <= 0 for w in self.weights
        ):
            raise ValueError("weights must be finite and positive")


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    redundancy: float
    metric: float
    confusion: np.ndarray  # (predicted class, true class) pixel counts


def _labels(grid) -> np.ndarray:
    return grid.labels if isinstance(grid, ClassGrid) else np.asarray(grid)


def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def focal_loss(scores: np.ndarray, gt, params: LossParams = LossParams()):
    """Weighted focal loss on raw per-pixel class scores.

    Applies soft-max internally; per pixel the loss is
    -w_t * (1 - s_t)^gamma * log(s_t) with s_t the soft-maxed score of the
    true class. Returns (per-pixel loss grid, mean over pixels).
    """
    labels = _labels(gt)
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape[:2] != labels.shape:
        raise ValueError(f"score shape {scores.shape} mismatches labels {labels.shape}")
    n_classes = scores.shape[2]
    probs = softmax(scores)
    rows, cols = np.indices(labels.shape)
    s_true = probs[rows, cols, labels]
    w = np.ones(n_classes) if params.weights is None else np.asarray(params.weights, dtype=float)
    if len(w) != n_classes:
        raise ValueError("weight count mismatches class count")
    s_true = np.clip(s_true, 1e-300, 1.0)
    grid = -w[labels] * (1.0 - s_true) ** params.gamma * np.log(s_true)
    return grid, float(grid.mean())


def class_weights(gt_label_grids, n_classes: int = 3) -> np.ndarray:
    """Inverse-frequency class weights over a dataset's ground-truth labels.

    w_k = total / (n_classes * count_k), then scaled so min(w) = 1. Errors
    when a class never occurs (degenerate dataset).
    """
    counts = np.zeros(n_classes, dtype=np.int64)
    n = 0
    for grid in gt_label_grids:
        labels = _labels(grid)
        counts += np.bincount(labels.ravel(), minlength=n_classes)[:n_classes]
        n += 1
    if n == 0:
        raise ValueError("empty dataset")
    if (counts == 0).any():
        missing = [i for i, c in enumerate(counts) if c == 0]
        raise ValueError(f"classes {missing} absent from the dataset")
    w = counts.sum() / (n_classes * counts.astype(np.float64))
    return w / w.min()


def _check_pair(pred, gt):
    c, g = _labels(pred), _labels(gt)
    if c.shape != g.shape:
        raise ValueError("prediction and ground truth shapes differ")
    gt_promising = int((g == CLASS_PROMISING).sum())
    if gt_promising == 0:
        raise ValueError("ground truth has no promising pixels")
    return c, g, gt_promising


def accuracy(pred, gt) -> float:
    """Fraction of ground-truth promising pixels labeled promising."""
    c, g, n_pr = _check_pair(pred, gt)
    hits = int(((c == CLASS_PROMISING) & (g == CLASS_PROMISING)).sum())
    return hits / n_pr


def redundancy(pred, gt) -> float:
    """Ground-truth-free pixels labeled promising, over gt promising count.

    Pixels that are obstacles in ground truth never count, even when
    predicted promising.
    """
    c, g, n_pr = _check_pair(pred, gt)
    spurious = int(((c == CLASS_PROMISING) & (g == CLASS_FREE)).sum())
    return spurious / n_pr


def combined_metric(pred, gt) -> EvalReport:
    """(1 - accuracy) + redundancy, cross-checked against the direct form
    1 - sum(c * (g_pr - g_free)) / sum(g_pr)."""
    c, g, n_pr = _check_pair(pred, gt)
    acc = accuracy(pred, gt)
    red = redundancy(pred, gt)
    metric = (1.0 - acc) + red

    c_pr = (c == CLASS_PROMISING).astype(np.int64)
    g_pr = (g == CLASS_PROMISING).astype(np.int64)
    g_free = (g == CLASS_FREE).astype(np.int64)
    direct = 1.0 - float((c_pr * (g_pr - g_free)).sum()) / n_pr
    assert abs(direct - metric) <= EQUIVALENCE_TOL, (direct, metric)

    n_classes = int(max(c.max(), g.max())) + 1
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (c.ravel(), g.ravel()), 1)
    return EvalReport(accuracy=acc, redundancy=red, metric=metric, confusion=confusion)
