"""Prompt-Parser: adaptive attentive mask plus Gaussian Masking.

The parser gates the query-template-integrated embedding with a spatially
spread activation map whose spread is uncertainty-controlled per token, then
keeps the elementwise maximum with the ungated embedding.
"""

from __future__ import annotations

import numpy as np

from ..numerics import Tensor, concat
from ..numerics import functional as F
from ..numerics.tensor import ShapeError, default_dtype
from .config import ModelConfig

CENTER_SHIFT_LIMIT = 2.0


def init_parser(scope, cfg: ModelConfig):
    n = cfg.n_tokens
    if cfg.prompting == "stack_mlp":
        scope.create("w_stack", (n, 3 * n), "xavier")
    elif cfg.prompting == "concat":
        scope.create("w_cat", (3 * cfg.length, cfg.length), "xavier")
        scope.create("b_cat", (cfg.length,), "zeros")
    if cfg.masking == "gaussian":
        scope.create("k_mu", (1, 1, 3, 3), "xavier")
        scope.create("b_mu", (1,), "zeros")
        scope.create("k_sig", (1, 1, 3, 3), "xavier")
        scope.create("b_sig", (1,), "zeros")


def _window_offsets(window):
    half = window // 2
    dy, dx = np.mgrid[-half:half + 1, -half:half + 1]
    return dx.reshape(-1).astype(np.float64), dy.reshape(-1).astype(np.float64)


def _window_indices(grid, window):
    """Flat gather indices (N, window^2) into the zero-padded activation grid."""
    half = window // 2
    padded = grid + 2 * half
    idx = np.empty((grid * grid, window * window), dtype=np.int64)
    token = 0
    for ty in range(grid):
        for tx in range(grid):
            k = 0
            for wy in range(window):
                for wx in range(window):
                    idx[token, k] = (ty + wy) * padded + (tx + wx)
                    k += 1
            token += 1
    return idx


def gaussian_window_weights(mu: Tensor, sigma: Tensor, window: int):
    """Per-token normalized Gaussian kernels, (B, N, window^2).

    The center is shifted by clamp(mu, -2, 2) along both axes; each kernel
    sums to 1 before application.
    """
    dx, dy = _window_offsets(window)
    dxc = Tensor(dx.astype(default_dtype()))
    dyc = Tensor(dy.astype(default_dtype()))
    b, n = mu.shape
    center = mu.clamp(-CENTER_SHIFT_LIMIT, CENTER_SHIFT_LIMIT).reshape(b, n, 1)
    two_var = (sigma * sigma * 2.0).reshape(b, n, 1)
    d2 = (dxc - center) ** 2 + (dyc - center) ** 2
    raw = (-(d2 / two_var)).exp()
    return raw / raw.sum(axis=-1, keepdims=True)


def prompt_parser_details(e_t: Tensor, e_q: Tensor, p1: Tensor, p2: Tensor,
                          scope, cfg: ModelConfig, g_override=None) -> dict:
    """Run the parser returning all intermediates (tests introspect these)."""
    n, length, g = cfg.n_tokens, cfg.length, cfg.token_grid
    for name, t in (("e_t", e_t), ("e_q", e_q)):
        if t.shape[-2:] != (n, length):
            raise ShapeError(f"prompt_parser {name} must be NxL=({n},{length}), "
                             f"got {t.shape}")
    batched = e_t.ndim == 3
    if not batched:
        e_t, e_q = e_t.reshape(1, n, length), e_q.reshape(1, n, length)
        p1, p2 = p1.reshape(1, -1, length), p2.reshape(1, -1, length)
    b = e_t.shape[0]
    p1f = p1.broadcast_to((b, n, length))
    p2f = p2.broadcast_to((b, n, length))

    e_tq = e_t * (p1 + p2 + e_q)

    out = {"e_tq": e_tq}
    if cfg.prompting == "stack_mlp":
        stacked = concat([e_t, p1f, p2f], axis=-2)          # (B, 3N, L)
        mixed = scope["w_stack"] @ stacked                   # (B, N, L)
        out["stacked"] = stacked
    elif cfg.prompting == "concat":
        stacked = concat([e_t, p1f, p2f], axis=-1)           # (B, N, 3L)
        mixed = stacked @ scope["w_cat"] + scope["b_cat"]
        out["stacked"] = stacked
    else:  # add
        mixed = e_t + p1 + p2
    attn_mask = mixed @ e_q.swapaxes(-1, -2)                 # (B, N, N)
    out["mixed"] = mixed
    out["attn_mask"] = attn_mask

    activation = attn_mask.mean(axis=-2)                     # (B, N) per query token
    out["activation"] = activation

    if cfg.masking == "gaussian":
        m4 = attn_mask.reshape(b, 1, n, n)
        mu = F.conv2d(m4, scope["k_mu"], scope["b_mu"]).mean(axis=-2).reshape(b, n)
        sigma = (F.conv2d(m4, scope["k_sig"], scope["b_sig"])
                 .mean(axis=-2).reshape(b, n).softplus() + cfg.sigma_floor)
        out["mu"], out["sigma"] = mu, sigma
        if g_override is not None:
            spread = Tensor(np.broadcast_to(
                np.asarray(g_override, dtype=default_dtype()), (b, n)).copy())
            out["kernels"] = None
        else:
            window = cfg.gaussian_window
            kernels = gaussian_window_weights(mu, sigma, window)
            out["kernels"] = kernels
            grid_act = activation.reshape(b, g, g)
            padded = F.pad2d(grid_act.reshape(b, 1, g, g), window // 2)
            pad_side = g + 2 * (window // 2)
            flat_idx = _window_indices(g, window)             # (N, w^2)
            batch_offsets = (np.arange(b) * pad_side * pad_side).reshape(b, 1, 1)
            windows = padded.take(flat_idx[None] + batch_offsets)  # (B, N, w^2)
            spread = (windows * kernels).sum(axis=-1)         # (B, N)
        out["spread"] = spread
        e_g = (spread.reshape(b, n, 1) * e_tq).maximum(e_tq)
    elif cfg.masking == "add":
        e_g = e_tq + activation.reshape(b, n, 1)
    elif cfg.masking == "binary":
        gate = Tensor((activation.data > 0).astype(default_dtype()))
        e_g = e_tq * gate.reshape(b, n, 1)
    else:  # norm: min-max normalize the activation, then gate
        lo = activation.data.min(axis=-1, keepdims=True)
        hi = activation.data.max(axis=-1, keepdims=True)
        scale = 1.0 / np.maximum(hi - lo, 1e-6)
        normed = (activation - Tensor(lo.astype(default_dtype()))) * \
            Tensor(scale.astype(default_dtype()))
        e_g = e_tq * normed.reshape(b, n, 1)

    out["e_g"] = e_g
    result = e_g * e_t
    out["output"] = result if batched else result.reshape(n, length)
    return out


def prompt_parser(e_t, e_q, p1, p2, scope, cfg: ModelConfig,
                  g_override=None) -> Tensor:
    return prompt_parser_details(e_t, e_q, p1, p2, scope, cfg,
                                 g_override=g_override)["output"]
