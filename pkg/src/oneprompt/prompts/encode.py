"""Turning prompts into the (p1, p2) token-embedding pair."""

from __future__ import annotations

import numpy as np

from ..numerics import Tensor, stack
from ..numerics import functional as F
from ..numerics.tensor import ShapeError
from .types import InvalidPromptError, Prompt, PromptEmbeddingPair, PromptKind

_NEIGHBORS = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]

MAX_DOODLE_POINTS = 64


def bresenham(p0, p1):
    """Integer line from p0 to p1 inclusive, classic Bresenham order."""
    x0, y0 = p0
    x1, y1 = p1
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    points = []
    while True:
        points.append((x0, y0))
        if (x0, y0) == (x1, y1):
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy
    return points


def rasterize_doodle(polylines, image_size: int):
    """Rasterize strokes to pixels: Bresenham segments then radius-1 dilation
    over the 8-neighborhood.

    Returns unique pixels in a deterministic traversal order (each stroke
    pixel immediately followed by its fresh neighbors); the browser client
    reproduces this bit-exactly.
    """
    if not polylines:
        raise InvalidPromptError("doodle has no strokes")
    seen = set()
    ordered = []

    def push(p):
        if 0 <= p[0] < image_size and 0 <= p[1] < image_size and p not in seen:
            seen.add(p)
            ordered.append(p)

    for line in polylines:
        if not line:
            continue
        base = []
        if len(line) == 1:
            base = [tuple(map(int, line[0]))]
        else:
            for a, b in zip(line[:-1], line[1:]):
                seg = bresenham(tuple(map(int, a)), tuple(map(int, b)))
                if base:
                    seg = seg[1:]  # avoid doubling shared endpoints
                base.extend(seg)
        for px in base:
            push(px)
            for dx, dy in _NEIGHBORS:
                push((px[0] + dx, px[1] + dy))
    if not ordered:
        raise InvalidPromptError("doodle rasterized to no pixels inside the image")
    return ordered


def _subsample(points, limit):
    if len(points) <= limit:
        return points
    idx = np.linspace(0, len(points) - 1, limit).round().astype(int)
    return [points[i] for i in idx]


def init_prompt_params(scope, length: int, latent: int = 64):
    scope.create("emb_fg", (length,), "embed")
    scope.create("emb_bg", (length,), "embed")
    scope.create("emb_tl", (length,), "embed")
    scope.create("emb_br", (length,), "embed")
    scope.create("seglab_w", (latent, length), "xavier")
    scope.create("seglab_b", (length,), "zeros")


def _mean_pe(points, length, image_size):
    pes = np.stack([F.sinusoidal_pe(p, length, image_size) for p in points])
    return Tensor(pes.mean(axis=0))


def encode_prompt_vecs(prompt: Prompt, scope, mask_ae=None, *,
                       length: int, image_size: int):
    """Encode a prompt into its two length-L vectors (before token tiling)."""
    prompt.validate()
    k = prompt.kind
    if k == PromptKind.CLICK:
        p1 = _mean_pe(prompt.fg_points, length, image_size) + scope["emb_fg"]
        if prompt.bg_points:
            p2 = _mean_pe(prompt.bg_points, length, image_size) + scope["emb_bg"]
        else:
            p2 = scope["emb_bg"]
        return p1, p2
    if k == PromptKind.BBOX:
        p1 = Tensor(F.sinusoidal_pe(prompt.top_left, length, image_size)) + scope["emb_tl"]
        p2 = Tensor(F.sinusoidal_pe(prompt.bottom_right, length, image_size)) + scope["emb_br"]
        return p1, p2
    if k == PromptKind.DOODLE:
        fg = _subsample(rasterize_doodle(prompt.fg_polylines, image_size),
                        MAX_DOODLE_POINTS)
        p1 = _mean_pe(fg, length, image_size) + scope["emb_fg"]
        if prompt.bg_polylines:
            bg = _subsample(rasterize_doodle(prompt.bg_polylines, image_size),
                            MAX_DOODLE_POINTS)
            p2 = _mean_pe(bg, length, image_size) + scope["emb_bg"]
        else:
            p2 = scope["emb_bg"]
        return p1, p2
    # SegLab: autoencoder latent projected to L; p1 and p2 share parameters.
    if mask_ae is None:
        raise InvalidPromptError("seglab prompt requires a mask autoencoder")
    if prompt.mask.shape != (mask_ae.mask_size, mask_ae.mask_size):
        raise ShapeError(
            f"seglab mask shape {prompt.mask.shape} does not match "
            f"autoencoder size {mask_ae.mask_size}")
    latent = mask_ae.encode(prompt.mask)
    vec = latent @ scope["seglab_w"] + scope["seglab_b"]
    return vec, vec


def encode_prompt(prompt: Prompt, scope, mask_ae=None, *,
                  n_tokens: int, length: int, image_size: int) -> PromptEmbeddingPair:
    """Full N x L embedding pair: each vector tiled across the token rows."""
    v1, v2 = encode_prompt_vecs(prompt, scope, mask_ae,
                                length=length, image_size=image_size)
    tile = lambda v: v.reshape(1, length).broadcast_to((n_tokens, length))
    return PromptEmbeddingPair(tile(v1), tile(v2))


def encode_prompt_batch(prompts, scope, mask_ae=None, *, length, image_size):
    """Stack per-episode prompt vectors into (B, 1, L) tensors for batching."""
    v1s, v2s = [], []
    for p in prompts:
        v1, v2 = encode_prompt_vecs(p, scope, mask_ae,
                                    length=length, image_size=image_size)
        v1s.append(v1.reshape(1, length))
        v2s.append(v2.reshape(1, length))
    return stack(v1s, axis=0), stack(v2s, axis=0)
