"""Convolutional mask autoencoder backing the SegLab prompt.

64x64 binary mask -> 64-d latent -> 64x64 reconstruction, trained once with
binary cross-entropy and frozen afterwards.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..numerics import ConfigError, ParamStore, Tensor
from ..numerics import functional as F
from ..numerics.optim import Adam

LATENT_DIM = 64
MASK_SIZE = 64
MIN_TRAIN_MASKS = 256


class MaskAutoencoder:
    """Encoder/decoder over binary masks; frozen after training."""

    mask_size = MASK_SIZE
    latent_dim = LATENT_DIM

    def __init__(self, scope=None, seed: int = 0):
        if scope is None:
            self._store = ParamStore(seed)
            scope = self._store.scope("mask_ae")
        else:
            self._store = None
        self.scope = scope
        if "enc_k0" not in scope:
            self._build(scope)

    @staticmethod
    def _build(sc):
        chans = [(1, 8), (8, 16), (16, 32)]
        for i, (ci, co) in enumerate(chans):
            sc.create(f"enc_k{i}", (co, ci, 3, 3), "xavier")
            sc.create(f"enc_b{i}", (co,), "zeros")
        sc.create("enc_w", (32 * 8 * 8, LATENT_DIM), "xavier")
        sc.create("enc_bl", (LATENT_DIM,), "zeros")
        sc.create("dec_w", (LATENT_DIM, 32 * 8 * 8), "xavier")
        sc.create("dec_bl", (32 * 8 * 8,), "zeros")
        for i, (ci, co) in enumerate([(32, 16), (16, 8), (8, 8)]):
            sc.create(f"dec_k{i}", (co, ci, 3, 3), "xavier")
            sc.create(f"dec_b{i}", (co,), "zeros")
        sc.create("dec_head_k", (1, 8, 1, 1), "xavier")
        sc.create("dec_head_b", (1,), "zeros")

    def param_names(self):
        return ["enc_k0", "enc_b0", "enc_k1", "enc_b1", "enc_k2", "enc_b2",
                "enc_w", "enc_bl", "dec_w", "dec_bl",
                "dec_k0", "dec_b0", "dec_k1", "dec_b1", "dec_k2", "dec_b2",
                "dec_head_k", "dec_head_b"]

    def parameters(self):
        return [(n, self.scope[n]) for n in self.param_names()]

    def encode_tensor(self, masks: Tensor) -> Tensor:
        """(B,1,64,64) float masks -> (B, latent)."""
        sc = self.scope
        h = masks
        for i in range(3):
            h = F.gelu(F.conv2d(h, sc[f"enc_k{i}"], sc[f"enc_b{i}"], stride=2))
        flat = h.reshape(h.shape[0], 32 * 8 * 8)
        return flat @ sc["enc_w"] + sc["enc_bl"]

    def decode_tensor(self, latent: Tensor) -> Tensor:
        sc = self.scope
        h = F.gelu(latent @ sc["dec_w"] + sc["dec_bl"])
        h = h.reshape(latent.shape[0], 32, 8, 8)
        for i in range(3):
            h = F.gelu(F.conv2d(F.upsample2x(h), sc[f"dec_k{i}"], sc[f"dec_b{i}"]))
        return F.conv2d(h, sc["dec_head_k"], sc["dec_head_b"])

    def encode(self, mask: np.ndarray) -> Tensor:
        """Single mask -> latent vector (length 64); frozen deterministic."""
        m = Tensor(np.asarray(mask, dtype=float)[None, None])
        return self.encode_tensor(m).reshape(LATENT_DIM)

    def reconstruct(self, mask: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        m = Tensor(np.asarray(mask, dtype=float)[None, None])
        logits = self.decode_tensor(self.encode_tensor(m)).data[0, 0]
        return (expit(logits) > threshold).astype(np.uint8)


def reconstruction_iou(ae: MaskAutoencoder, masks) -> float:
    """Mean IoU at threshold 0.5; empty-vs-empty counts as 1.0."""
    if np.asarray(masks[0]).ndim == 1:   # a single 2-D mask was passed
        masks = [masks]
    scores = []
    for m in masks:
        rec = ae.reconstruct(m).astype(bool)
        gt = np.asarray(m).astype(bool)
        union = (rec | gt).sum()
        scores.append(1.0 if union == 0 else (rec & gt).sum() / union)
    return float(np.mean(scores))


def train_mask_autoencoder(masks, epochs: int = 40, rng=None,
                           ae: MaskAutoencoder | None = None,
                           batch_size: int = 32, lr: float = 2e-3) -> MaskAutoencoder:
    """Train (or re-train) the autoencoder with BCE on binary masks."""
    masks = [np.asarray(m) for m in masks]
    if len(masks) < MIN_TRAIN_MASKS:
        raise ConfigError(
            f"mask autoencoder needs >= {MIN_TRAIN_MASKS} masks, got {len(masks)}")
    rng = rng or np.random.default_rng(0)
    ae = ae or MaskAutoencoder(seed=int(rng.integers(2 ** 31)))
    opt = Adam(ae.parameters(), lr=lr)
    data = np.stack(masks).astype(float)[:, None]
    n = len(masks)
    for _ in range(epochs):
        order = rng.permutation(n)
        for lo in range(0, n, batch_size):
            idx = order[lo:lo + batch_size]
            x = Tensor(data[idx])
            target = Tensor(data[idx])
            logits = ae.decode_tensor(ae.encode_tensor(x))
            # BCE with logits: softplus(z) - t*z, averaged.
            loss = (logits.softplus() - target * logits).mean()
            opt.zero_grad()
            loss.backward()
            opt.step()
    return ae
