"""Ensemble prediction and segment-everything inference."""

from __future__ import annotations

import numpy as np

from ..prompts import Prompt, PromptKind, QualityLevel, simulate_prompt
from .metrics import mask_iou

NMS_IOU = 0.7


def predict_prob_batch(model, queries, templates, prompts) -> np.ndarray:
    """Foreground probability maps (B, H, W) for a batch of episodes."""
    logits = model.forward_batch(np.stack(queries), np.stack(templates),
                                 list(prompts)).data
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e[:, 1] / e.sum(axis=1)


def ensemble_predict(model, query_image, templates, kind: PromptKind, rng,
                     k: int = 10, quality=QualityLevel.ORACLE,
                     template_index=None):
    """Mean foreground probability over K (template, prompt) draws.

    `templates` is the task's template split (list of Samples); draws repeat
    templates with fresh prompt noise.  Returns (binary mask, prob map).
    `template_index` forces a fixed template for paired designs.
    """
    if k < 1:
        raise ValueError("ensemble size K must be >= 1")
    if not templates:
        raise ValueError("ensemble_predict requires a nonempty template split")
    t_imgs, prompts = [], []
    for _ in range(k):
        idx = (int(rng.integers(len(templates))) if template_index is None
               else template_index)
        sample = templates[idx]
        t_imgs.append(sample.image)
        prompts.append(simulate_prompt(sample.mask, kind, quality, rng))
    queries = [np.asarray(query_image)] * k
    prob = predict_prob_batch(model, queries, t_imgs, prompts).mean(axis=0)
    return prob > 0.5, prob


def grid_points(image_size: int, stride: int):
    """Regular foreground-point grid, cell-centered (stride//2 offset)."""
    if image_size % stride != 0:
        raise ValueError(f"stride {stride} does not divide image size "
                         f"{image_size}")
    half = stride // 2
    coords = range(half, image_size, stride)
    return [(y, x) for y in coords for x in coords]


def segment_everything(model, query_image, template_image,
                       grid_stride: int = 16):
    """One Click prompt per grid point on the template; NMS-deduplicated.

    Returns a list of (mask, score) with score = mean foreground probability
    inside the mask; empty masks are dropped; survivors have pairwise
    IoU < 0.7 (greedy, higher score wins).
    """
    image_size = np.asarray(query_image).shape[0]
    points = grid_points(image_size, grid_stride)
    prompts = [Prompt(PromptKind.CLICK, fg_points=[pt]) for pt in points]
    probs = predict_prob_batch(model, [query_image] * len(points),
                               [template_image] * len(points), prompts)
    candidates = []
    for prob in probs:
        mask = prob > 0.5
        if not mask.any():
            continue
        candidates.append((mask, float(prob[mask].mean())))
    candidates.sort(key=lambda ms: -ms[1])
    kept = []
    for mask, score in candidates:
        if all(mask_iou(mask, m) < NMS_IOU for m, _ in kept):
            kept.append((mask, score))
    return kept
