"""Weighted focal loss on raw per-pixel class scores.

Per pixel: -w_t * (1 - s_t)^gamma * log(s_t), with s_t the soft-maxed score
of the true class. gamma=0 with unit weights reduces exactly to
cross-entropy.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F


def focal_loss(
    scores: torch.Tensor,
    labels: torch.Tensor,
    gamma: float = 2.0,
    weights: torch.Tensor | None = None,
) -> torch.Tensor:
    """Mean weighted focal loss.

    scores: (N, K, H, W) raw class scores; labels: (N, H, W) int64.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    log_probs = F.log_softmax(scores, dim=1)
    log_s_true = log_probs.gather(1, labels.unsqueeze(1)).squeeze(1)
    s_true = log_s_true.exp()
    focal = (1.0 - s_true) ** gamma if gamma != 0 else torch.ones_like(s_true)
    loss = -focal * log_s_true
    if weights is not None:
        loss = loss * weights.to(scores.dtype)[labels]
    return loss.mean()
