"""Prompt simulation at graded quality tiers.

Tier constants (jitter sigma, outside fraction, morph radius, flip
probability) are fixed so quality-ladder sweeps are reproducible.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage
from skimage.morphology import skeletonize

from .types import InvalidPromptError, Prompt, PromptKind, QualityLevel

CLICK_SIGMA = {QualityLevel.LOW: 6.0, QualityLevel.MEDIUM: 3.0,
               QualityLevel.HIGH: 1.0, QualityLevel.ORACLE: 0.0}
DOODLE_OUTSIDE = {QualityLevel.LOW: 0.30, QualityLevel.MEDIUM: 0.15,
                  QualityLevel.HIGH: 0.05, QualityLevel.ORACLE: 0.0}
SEGLAB_RADIUS = {QualityLevel.LOW: 3, QualityLevel.MEDIUM: 2,
                 QualityLevel.HIGH: 1, QualityLevel.ORACLE: 0}
SEGLAB_FLIP = {QualityLevel.LOW: 0.10, QualityLevel.MEDIUM: 0.05,
               QualityLevel.HIGH: 0.02, QualityLevel.ORACLE: 0.0}

DOODLE_WALK_LENGTH = 20


def _largest_component(mask):
    labels, count = ndimage.label(mask, structure=np.ones((3, 3)))
    if count == 0:
        raise InvalidPromptError("cannot simulate a prompt on an empty mask")
    sizes = ndimage.sum(mask, labels, index=np.arange(1, count + 1))
    return labels == (int(np.argmax(sizes)) + 1)


def _round_half_up(v):
    return int(np.floor(v + 0.5))


def _jitter_point(point, sigma, size, rng):
    if sigma == 0.0:
        return point
    for _ in range(1000):
        x = _round_half_up(point[0] + rng.normal(0.0, sigma))
        y = _round_half_up(point[1] + rng.normal(0.0, sigma))
        if 0 <= x < size and 0 <= y < size:
            return (x, y)
    return point


def simulate_click(mask, quality, rng):
    comp = _largest_component(mask)
    ys, xs = np.nonzero(comp)
    center = (_round_half_up(xs.mean()), _round_half_up(ys.mean()))
    pt = _jitter_point(center, CLICK_SIGMA[quality], mask.shape[1], rng)
    return Prompt(PromptKind.CLICK, fg_points=[pt])


def simulate_bbox(mask, quality, rng):
    comp = _largest_component(mask)
    ys, xs = np.nonzero(comp)
    tl = (int(xs.min()), int(ys.min()))
    br = (int(xs.max()), int(ys.max()))
    sigma = CLICK_SIGMA[quality]
    size = mask.shape[1]
    for _ in range(1000):
        jtl = _jitter_point(tl, sigma, size, rng)
        jbr = _jitter_point(br, sigma, size, rng)
        if jtl[0] < jbr[0] and jtl[1] < jbr[1]:
            return Prompt(PromptKind.BBOX, top_left=jtl, bottom_right=jbr)
    return Prompt(PromptKind.BBOX, top_left=tl, bottom_right=br)


def simulate_doodle(mask, quality, rng):
    comp = _largest_component(mask)
    region = ndimage.binary_dilation(skeletonize(comp), np.ones((3, 3)))
    outside_frac = DOODLE_OUTSIDE[quality]
    size = mask.shape[1]
    ys, xs = np.nonzero(region)
    start = int(rng.integers(len(xs)))
    x, y = int(xs[start]), int(ys[start])
    path = [(x, y)]
    moves = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
    for _ in range(DOODLE_WALK_LENGTH - 1):
        free_step = rng.random() < outside_frac
        order = rng.permutation(8)
        stepped = False
        for i in order:
            dx, dy = moves[i]
            nx, ny = x + dx, y + dy
            if not (0 <= nx < size and 0 <= ny < size):
                continue
            if free_step or region[ny, nx]:
                x, y = nx, ny
                path.append((x, y))
                stepped = True
                break
        if not stepped:
            path.append((x, y))
    return Prompt(PromptKind.DOODLE, fg_polylines=[path])


def simulate_seglab(mask, quality, rng):
    out = mask.astype(bool).copy()
    radius = SEGLAB_RADIUS[quality]
    if radius > 0:
        struct = ndimage.iterate_structure(ndimage.generate_binary_structure(2, 1),
                                           radius)
        if rng.random() < 0.5:
            eroded = ndimage.binary_erosion(out, struct)
            if eroded.any():
                out = eroded
            else:
                out = ndimage.binary_dilation(out, struct)
        else:
            out = ndimage.binary_dilation(out, struct)
    flip_p = SEGLAB_FLIP[quality]
    if flip_p > 0.0:
        inner = out & ~ndimage.binary_erosion(out)
        outer = ndimage.binary_dilation(out) & ~out
        boundary = inner | outer
        flips = boundary & (rng.random(out.shape) < flip_p)
        out = out ^ flips
    return Prompt(PromptKind.SEGLAB, mask=out.astype(np.uint8))


def simulate_prompt(mask: np.ndarray, kind: PromptKind, quality: QualityLevel,
                    rng: np.random.Generator) -> Prompt:
    """Simulate a prompt of `kind` at `quality` from a ground-truth mask.

    Deterministic given the rng state; Oracle tiers add no noise.
    """
    mask = np.asarray(mask).astype(bool)
    if not mask.any():
        raise InvalidPromptError("cannot simulate a prompt on an empty mask")
    if quality == QualityLevel.RECORDED:
        raise InvalidPromptError("Recorded prompts come from UI sessions, not simulation")
    if kind == PromptKind.CLICK:
        return simulate_click(mask, quality, rng).validate()
    if kind == PromptKind.BBOX:
        return simulate_bbox(mask, quality, rng).validate()
    if kind == PromptKind.DOODLE:
        return simulate_doodle(mask, quality, rng).validate()
    return simulate_seglab(mask, quality, rng).validate()
