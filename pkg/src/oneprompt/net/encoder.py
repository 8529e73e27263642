"""Shared CNN encoder and per-level token projections.

Feature maps flow channel-last (B, H, W, C) internally; the public image
contract stays (B, 1, H, W) grayscale.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..numerics import Tensor
from ..numerics import functional as F
from ..numerics.tensor import ShapeError
from .config import ModelConfig


@dataclass
class FeaturePyramid:
    levels: list      # skip features (B, H_l, W_l, C_l), level 0 = finest
    bottleneck: Tensor


def init_encoder(scope, cfg: ModelConfig):
    prev = cfg.in_channels
    for i, ch in enumerate(cfg.encoder_channels):
        scope.create(f"s{i}_ka", (3, 3, prev, ch), "xavier_last")
        scope.create(f"s{i}_ba", (ch,), "zeros")
        scope.create(f"s{i}_kb", (3, 3, ch, ch), "xavier_last")
        scope.create(f"s{i}_bb", (ch,), "zeros")
        nxt = cfg.encoder_channels[min(i + 1, cfg.num_blocks - 1)]
        scope.create(f"s{i}_kd", (3, 3, ch, nxt), "xavier_last")
        scope.create(f"s{i}_bd", (nxt,), "zeros")
        prev = nxt


def encode_image(x: Tensor, scope, cfg: ModelConfig) -> FeaturePyramid:
    """(B,1,H,W) image -> skip features per stage plus a bottleneck map."""
    if x.shape[-2:] != (cfg.image_size, cfg.image_size):
        raise ShapeError(f"image shape {x.shape} does not match configured "
                         f"size {cfg.image_size}")
    h = x.transpose(0, 2, 3, 1)
    levels = []
    for i in range(cfg.num_blocks):
        h = F.gelu(F.conv2d_nhwc(h, scope[f"s{i}_ka"], scope[f"s{i}_ba"]))
        h = F.gelu(F.conv2d_nhwc(h, scope[f"s{i}_kb"], scope[f"s{i}_bb"]))
        levels.append(h)
        h = F.gelu(F.conv2d_nhwc(h, scope[f"s{i}_kd"], scope[f"s{i}_bd"],
                                 stride=2))
    return FeaturePyramid(levels, h)


def init_projections(scope, cfg: ModelConfig):
    for level in range(cfg.num_blocks):
        ch = cfg.encoder_channels[level]
        p = cfg.patch_size(level)
        scope.create(f"lvl{level}_w", (p * p * ch, cfg.length), "xavier")
        scope.create(f"lvl{level}_b", (cfg.length,), "zeros")
    ch = cfg.encoder_channels[-1]
    p = cfg.patch_size("bottleneck")
    scope.create("bott_w", (p * p * ch, cfg.length), "xavier")
    scope.create("bott_b", (cfg.length,), "zeros")
    scope.create("pos", (cfg.n_tokens, cfg.length), "embed")


def project_level(feature: Tensor, level, scope, cfg: ModelConfig) -> Tensor:
    """Patchify a channel-last feature map into the N x L token embedding.

    Non-overlapping patches sized so every level yields the same token grid;
    a learned per-token position embedding is shared across levels.
    """
    p = cfg.patch_size(level)
    g = cfg.token_grid
    prefix = "bott" if level == "bottleneck" else f"lvl{level}"
    b, c = feature.shape[0], feature.shape[-1]
    patches = (feature.reshape(b, g, p, g, p, c)
               .transpose(0, 1, 3, 2, 4, 5)
               .reshape(b, g * g, p * p * c))
    tokens = patches @ scope[f"{prefix}_w"] + scope[f"{prefix}_b"]
    return tokens + scope["pos"]
