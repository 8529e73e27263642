"""Neural-network primitives built on the autodiff Tensor.

All ops accept an optional leading batch dimension and are fused where it
matters for CPU speed (layer norm, softmax, conv via im2col + GEMM).
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit
from scipy.special import erf

from .tensor import ConfigError, ShapeError, Tensor, default_dtype

_INV_SQRT2 = 0.7071067811865476
_INV_SQRT2PI = 0.3989422804014327


_GELU_BETA = 1.702


def gelu(x: Tensor) -> Tensor:
    """Sigmoid-approximated GELU: x * sigmoid(1.702 x) (cheap on CPU)."""
    xd = x.data
    sig = expit(_GELU_BETA * xd)
    out = Tensor(xd * sig, x.requires_grad, (x,))

    def backward(g):
        if x.requires_grad:
            x.grad += g * (sig * (1.0 + _GELU_BETA * xd * (1.0 - sig)))

    out._backward = backward
    return out


def gelu_exact(x: Tensor) -> Tensor:
    """erf-based GELU (reference implementation for tests)."""
    xd = x.data
    y = 0.5 * xd * (1.0 + erf(xd * _INV_SQRT2))
    out = Tensor(y, x.requires_grad, (x,))

    def backward(g):
        if x.requires_grad:
            cdf = 0.5 * (1.0 + erf(xd * _INV_SQRT2))
            pdf = _INV_SQRT2PI * np.exp(-0.5 * xd * xd)
            x.grad += g * (cdf + xd * pdf)

    out._backward = backward
    return out


def softmax(x: Tensor) -> Tensor:
    """Softmax over the last axis (numerically stable, fused backward)."""
    z = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=-1, keepdims=True)
    out = Tensor(y, x.requires_grad, (x,))

    def backward(g):
        if x.requires_grad:
            x.grad += y * (g - (g * y).sum(axis=-1, keepdims=True))

    out._backward = backward
    return out


def log_softmax(x: Tensor) -> Tensor:
    z = x.data - x.data.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=-1, keepdims=True))
    out = Tensor(z - lse, x.requires_grad, (x,))
    y = np.exp(z - lse)

    def backward(g):
        if x.requires_grad:
            x.grad += g - y * g.sum(axis=-1, keepdims=True)

    out._backward = backward
    return out


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Layer norm over the last axis with learnable gain/bias."""
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = Tensor(xhat * gain.data + bias.data,
                 x.requires_grad or gain.requires_grad or bias.requires_grad,
                 (x, gain, bias))
    n = x.shape[-1]

    def backward(g):
        if gain.requires_grad:
            gain.grad += (g * xhat).reshape(-1, n).sum(axis=0)
        if bias.requires_grad:
            bias.grad += g.reshape(-1, n).sum(axis=0)
        if x.requires_grad:
            gx = g * gain.data
            x.grad += inv * (gx - gx.mean(axis=-1, keepdims=True)
                             - xhat * (gx * xhat).mean(axis=-1, keepdims=True))

    out._backward = backward
    return out


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """x @ weight (+ bias); weight is (in, out)."""
    out = x @ weight
    if bias is not None:
        out = out + bias
    return out


# ----------------------------------------------------------------------- conv


def _im2col_nhwc(xn, k, stride, pad):
    """xn: (B, H, W, C) -> (B*Ho*Wo, k*k*C). Channel-last keeps patch rows
    contiguous, which makes the gather cheap on CPU."""
    b, h, w, c = xn.shape
    xp = np.pad(xn, ((0, 0), (pad, pad), (pad, pad), (0, 0)))
    ho = (h + 2 * pad - k) // stride + 1
    wo = (w + 2 * pad - k) // stride + 1
    s = xp.strides
    view = np.lib.stride_tricks.as_strided(
        xp, (b, ho, wo, k, k, c),
        (s[0], s[1] * stride, s[2] * stride, s[1], s[2], s[3]))
    return np.ascontiguousarray(view).reshape(b * ho * wo, k * k * c), ho, wo


def _col2im_nhwc(gcols, xshape, k, stride, pad, ho, wo):
    b, h, w, c = xshape
    gx = np.zeros((b, h + 2 * pad, w + 2 * pad, c), dtype=gcols.dtype)
    gview = gcols.reshape(b, ho, wo, k, k, c)
    for i in range(k):
        for j in range(k):
            gx[:, i:i + ho * stride:stride, j:j + wo * stride:stride, :] += \
                gview[:, :, :, i, j, :]
    if pad == 0:
        return gx
    return gx[:, pad:pad + h, pad:pad + w, :]


def conv2d(x: Tensor, kernel: Tensor, bias: Tensor | None = None,
           stride: int = 1) -> Tensor:
    """Same-padded cross-correlation. x: (C,H,W) or (B,C,H,W); kernel: (Co,C,k,k)."""
    squeeze = x.ndim == 3
    xd = x.data[None] if squeeze else x.data
    co, ci, k, k2 = kernel.shape
    if k != k2 or k % 2 == 0:
        raise ConfigError(f"conv2d kernel must be square with odd size, got {k}x{k2}")
    if xd.shape[1] != ci:
        raise ShapeError(f"conv2d channels mismatch: input {xd.shape} vs kernel {kernel.shape}")
    pad = k // 2
    xn = np.ascontiguousarray(xd.transpose(0, 2, 3, 1))
    cols, ho, wo = _im2col_nhwc(xn, k, stride, pad)
    wmat = np.ascontiguousarray(kernel.data.transpose(2, 3, 1, 0)) \
        .reshape(k * k * ci, co)
    y = cols @ wmat
    if bias is not None:
        y = y + bias.data
    b = xd.shape[0]
    y = np.ascontiguousarray(y.reshape(b, ho, wo, co).transpose(0, 3, 1, 2))
    if squeeze:
        y = y[0]
    req = x.requires_grad or kernel.requires_grad or (
        bias is not None and bias.requires_grad)
    parents = (x, kernel) if bias is None else (x, kernel, bias)
    out = Tensor(y, req, parents)

    def backward(g):
        gd = g[None] if squeeze else g
        gmat = np.ascontiguousarray(gd.transpose(0, 2, 3, 1)).reshape(-1, co)
        if bias is not None and bias.requires_grad:
            bias.grad += gmat.sum(axis=0)
        if kernel.requires_grad:
            gw = (cols.T @ gmat).reshape(k, k, ci, co)
            kernel.grad += gw.transpose(3, 2, 0, 1)
        if x.requires_grad:
            gcols = gmat @ wmat.T
            gxn = _col2im_nhwc(gcols, xn.shape, k, stride, pad, ho, wo)
            gx = gxn.transpose(0, 3, 1, 2)
            x.grad += gx[0] if squeeze else gx

    out._backward = backward
    return out


def conv2d_nhwc(x: Tensor, kernel: Tensor, bias: Tensor | None = None,
                stride: int = 1) -> Tensor:
    """Channel-last conv used on hot paths. x: (B,H,W,C); kernel: (k,k,Ci,Co).

    Same semantics as conv2d up to memory layout; avoids all layout copies.
    """
    k, k2, ci, co = kernel.shape
    if k != k2 or k % 2 == 0:
        raise ConfigError(f"conv2d kernel must be square with odd size, got {k}x{k2}")
    if x.shape[-1] != ci:
        raise ShapeError(f"conv2d channels mismatch: input {x.shape} vs kernel {kernel.shape}")
    pad = k // 2
    cols, ho, wo = _im2col_nhwc(x.data, k, stride, pad)
    wmat = kernel.data.reshape(k * k * ci, co)
    y = cols @ wmat
    if bias is not None:
        y = y + bias.data
    b = x.shape[0]
    req = x.requires_grad or kernel.requires_grad or (
        bias is not None and bias.requires_grad)
    parents = (x, kernel) if bias is None else (x, kernel, bias)
    out = Tensor(y.reshape(b, ho, wo, co), req, parents)

    def backward(g):
        gmat = g.reshape(-1, co)
        if bias is not None and bias.requires_grad:
            bias.grad += gmat.sum(axis=0)
        if kernel.requires_grad:
            kernel.grad += (cols.T @ gmat).reshape(kernel.shape)
        if x.requires_grad:
            gcols = gmat @ wmat.T
            x.grad += _col2im_nhwc(gcols, x.shape, k, stride, pad, ho, wo)

    out._backward = backward
    return out


def upsample2x_nhwc(x: Tensor) -> Tensor:
    """Nearest-neighbour 2x upsampling of (B,H,W,C)."""
    y = x.data.repeat(2, axis=1).repeat(2, axis=2)
    out = Tensor(y, x.requires_grad, (x,))
    b, h, w, c = x.shape

    def backward(g):
        if x.requires_grad:
            x.grad += g.reshape(b, h, 2, w, 2, c).sum(axis=(2, 4))

    out._backward = backward
    return out


def upsample2x(x: Tensor) -> Tensor:
    """Nearest-neighbour 2x spatial upsampling of (B,C,H,W) or (C,H,W)."""
    y = x.data.repeat(2, axis=-2).repeat(2, axis=-1)
    out = Tensor(y, x.requires_grad, (x,))
    h, w = x.shape[-2], x.shape[-1]

    def backward(g):
        if x.requires_grad:
            gs = g.reshape(g.shape[:-2] + (h, 2, w, 2))
            x.grad += gs.sum(axis=(-3, -1))

    out._backward = backward
    return out


def pad2d(x: Tensor, pad: int) -> Tensor:
    """Zero-pad the last two axes by `pad` on each side."""
    width = [(0, 0)] * (x.ndim - 2) + [(pad, pad), (pad, pad)]
    out = Tensor(np.pad(x.data, width), x.requires_grad, (x,))

    def backward(g):
        if x.requires_grad:
            sl = (slice(None),) * (x.ndim - 2) + (
                slice(pad, pad + x.shape[-2]), slice(pad, pad + x.shape[-1]))
            x.grad += g[sl]

    out._backward = backward
    return out


# ------------------------------------------------------------------ attention


def multi_head_attention(q: Tensor, k: Tensor, v: Tensor, heads: int) -> Tensor:
    """Scaled dot-product attention; inputs are (..., N, L) projections."""
    length = q.shape[-1]
    if length % heads != 0:
        raise ConfigError(f"embedding length {length} not divisible by {heads} heads")
    dh = length // heads

    def split(t):
        n = t.shape[-2]
        return t.reshape(t.shape[:-2] + (n, heads, dh)).swapaxes(-3, -2)

    qh, kh, vh = split(q), split(k), split(v)
    logits = (qh @ kh.swapaxes(-1, -2)) * (1.0 / np.sqrt(dh))
    weights = softmax(logits)
    ctx = weights @ vh
    n = q.shape[-2]
    return ctx.swapaxes(-3, -2).reshape(q.shape[:-2] + (n, length))


def attention_weights(q: Tensor, k: Tensor, heads: int) -> np.ndarray:
    """Attention weight matrices only (for tests / introspection)."""
    length = q.shape[-1]
    dh = length // heads

    def split(t):
        n = t.shape[-2]
        return t.reshape(t.shape[:-2] + (n, heads, dh)).swapaxes(-3, -2)

    logits = (split(q) @ split(k).swapaxes(-1, -2)) * (1.0 / np.sqrt(dh))
    return softmax(logits).data


# -------------------------------------------------------- positional encoding


def sinusoidal_pe(coord, dim: int, image_size: int = 64,
                  base: float = 10000.0) -> np.ndarray:
    """Encode an (x, y) pixel coordinate into a length-`dim` vector.

    First dim/2 entries encode x, last dim/2 encode y, each as interleaved
    sin/cos over geometric frequencies. Out-of-range coordinates are clamped
    with a warning. Deterministic and dtype-stable.
    """
    if dim % 4 != 0:
        raise ConfigError(f"positional encoding dim must be divisible by 4, got {dim}")
    x, y = coord
    cx, cy = float(np.clip(x, 0, image_size - 1)), float(np.clip(y, 0, image_size - 1))
    if cx != x or cy != y:
        import warnings
        warnings.warn(f"coordinate {coord} clamped to ({cx}, {cy})")
    quarter = dim // 4
    freqs = base ** (-np.arange(quarter, dtype=np.float64) / quarter)
    vec = np.empty(dim, dtype=np.float64)
    for half, c in ((0, cx), (1, cy)):
        off = half * (dim // 2)
        vec[off:off + dim // 2:2] = np.sin(c * freqs)
        vec[off + 1:off + dim // 2:2] = np.cos(c * freqs)
    return vec.astype(default_dtype())
