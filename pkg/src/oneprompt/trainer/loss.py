"""Combined cross-entropy + soft dice loss."""

from __future__ import annotations

import numpy as np

from ..numerics import Tensor
from ..numerics import functional as F


def _check_binary(target: np.ndarray):
    if not np.isin(target, (0, 1)).all():
        raise ValueError("target mask must be binary (0/1)")


def combined_loss(logits: Tensor, target: np.ndarray, smooth: float = 1.0):
    """Loss for one episode: mean 2-class CE + soft dice on the fg channel.

    logits: (2, H, W); target: (H, W) binary.  Returns (total, ce, dice)
    scalar tensors; total = ce + dice and is differentiable.
    """
    if logits.shape[0] != 2 or logits.shape[1:] != target.shape:
        raise ValueError(f"logits {logits.shape} do not match target "
                         f"{target.shape}")
    total, ce, dice = combined_loss_batch(
        logits.reshape((1,) + logits.shape), target[None], smooth)
    return total, ce, dice


def combined_loss_batch(logits: Tensor, targets: np.ndarray,
                        smooth: float = 1.0):
    """Mean per-episode combined loss over a batch.

    logits: (B, 2, H, W); targets: (B, H, W) binary.
    """
    targets = np.asarray(targets)
    _check_binary(targets)
    b = logits.shape[0]
    t = targets.astype(logits.data.dtype)
    # (B, 2, H, W) -> (B, H, W, 2) so the fused softmax on the last axis
    # applies per pixel.
    ls = F.log_softmax(logits.transpose(0, 2, 3, 1))
    onehot = np.stack([1.0 - t, t], axis=-1)
    ce = -(ls * Tensor(onehot)).sum() / float(targets.size)
    p_fg = (ls.exp() * Tensor(np.array([0.0, 1.0], dtype=t.dtype))).sum(axis=-1)
    inter = (p_fg * Tensor(t)).sum(axis=(1, 2))
    denom = p_fg.sum(axis=(1, 2)) + Tensor(t.sum(axis=(1, 2)))
    dice = (1.0 - (2.0 * inter + smooth) / (denom + smooth)).sum() / float(b)
    return ce + dice, ce, dice
