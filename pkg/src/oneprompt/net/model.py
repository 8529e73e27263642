"""The full One-Prompt model: encoder, former stack, segmentation head."""

from __future__ import annotations

import numpy as np

from ..numerics import ParamStore, Tensor
from ..numerics import functional as F
from ..prompts import (MaskAutoencoder, Prompt, encode_prompt_batch,
                       init_prompt_params)
from .config import ModelConfig
from .encoder import encode_image, init_encoder, init_projections, project_level
from .former import former_block, init_former_block

HEAD_CHANNELS = (64, 32)


class OnePromptModel:
    """forward(query, template, prompt) -> 2-class logits over the query."""

    def __init__(self, config: ModelConfig | None = None, seed: int = 0):
        self.config = config or ModelConfig()
        self.params = ParamStore(seed)
        cfg = self.config
        init_encoder(self.params.scope("encoder"), cfg)
        init_projections(self.params.scope("proj"), cfg)
        for i in range(cfg.num_blocks):
            init_former_block(self.params.scope(f"block{i}"), cfg)
        self._init_head()
        init_prompt_params(self.params.scope("prompt"), cfg.length,
                           latent=MaskAutoencoder.latent_dim)
        self.mask_ae = (MaskAutoencoder(self.params.scope("mask_ae"))
                        if cfg.with_mask_ae else None)

    def _init_head(self):
        cfg = self.config
        sc = self.params.scope("head")
        chans = (cfg.length,) + HEAD_CHANNELS
        for i in range(len(HEAD_CHANNELS)):
            sc.create(f"k{i}", (3, 3, chans[i], chans[i + 1]), "xavier_last")
            sc.create(f"b{i}", (chans[i + 1],), "zeros")
        sc.create("k_out", (1, 1, HEAD_CHANNELS[-1], 2), "xavier_last")
        sc.create("b_out", (2,), "zeros")

    # ----------------------------------------------------------------- params

    def trainable_params(self):
        """All parameters except the frozen mask autoencoder."""
        return [(n, t) for n, t in self.params.items()
                if not n.startswith("mask_ae.")]

    def param_groups(self):
        groups = {}
        for name, t in self.trainable_params():
            groups.setdefault(name.split(".")[0], []).append((name, t))
        return groups

    # ---------------------------------------------------------------- forward

    def encode_image(self, x: Tensor):
        return encode_image(x, self.params.scope("encoder"), self.config)

    def _head(self, state: Tensor) -> Tensor:
        cfg = self.config
        sc = self.params.scope("head")
        b = state.shape[0]
        g = cfg.token_grid
        h = state.reshape(b, g, g, cfg.length)
        ups = int(np.log2(cfg.image_size // g))
        for i in range(len(HEAD_CHANNELS)):
            if ups > 0:
                h = F.upsample2x_nhwc(h)
                ups -= 1
            h = F.gelu(F.conv2d_nhwc(h, sc[f"k{i}"], sc[f"b{i}"]))
        while ups > 0:  # any remaining spatial gap is closed before the head
            h = F.upsample2x_nhwc(h)
            ups -= 1
        logits = F.conv2d_nhwc(h, sc["k_out"], sc["b_out"])
        return logits.transpose(0, 3, 1, 2)

    def forward_batch(self, queries: np.ndarray, templates: np.ndarray,
                      prompts: list) -> Tensor:
        """queries/templates: (B, H, W) float arrays; prompts: list of Prompt.

        Returns logits (B, 2, H, W).
        """
        cfg = self.config
        b = queries.shape[0]
        q_img = Tensor(np.asarray(queries)[:, None])
        t_img = Tensor(np.asarray(templates)[:, None])
        q_pyr = self.encode_image(q_img)
        t_pyr = self.encode_image(t_img)
        proj = self.params.scope("proj")
        p1, p2 = encode_prompt_batch(prompts, self.params.scope("prompt"),
                                     self.mask_ae, length=cfg.length,
                                     image_size=cfg.image_size)
        state = project_level(q_pyr.bottleneck, "bottleneck", proj, cfg)
        for i, level in enumerate(reversed(range(cfg.num_blocks))):
            e_q = project_level(q_pyr.levels[level], level, proj, cfg)
            e_t = project_level(t_pyr.levels[level], level, proj, cfg)
            state = former_block(e_q, e_t, state, p1, p2,
                                 self.params.scope(f"block{i}"), cfg)
        return self._head(state)

    def forward(self, query: np.ndarray, template: np.ndarray,
                prompt: Prompt) -> Tensor:
        """Single episode: (H, W) images -> logits (2, H, W)."""
        logits = self.forward_batch(np.asarray(query)[None],
                                    np.asarray(template)[None], [prompt])
        cfg = self.config
        return logits.reshape(2, cfg.image_size, cfg.image_size)

    def predict_prob(self, query, template, prompt) -> np.ndarray:
        """Foreground probability map (H, W), no gradients retained."""
        logits = self.forward(query, template, prompt).data
        z = logits - logits.max(axis=0, keepdims=True)
        e = np.exp(z)
        return (e[1] / e.sum(axis=0)).astype(logits.dtype)
