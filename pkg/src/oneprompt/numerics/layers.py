"""Parameterized layers: cross-attention and feed-forward sublayers.

Both use pre-layer-norm with a residual connection, so zero-initializing the
output projection turns the sublayer into an exact identity. Self-attention
is cross_attention(q, q, ...).
"""

from __future__ import annotations

from . import functional as F
from .params import Scope
from .tensor import Tensor


def init_attention(scope: Scope, length: int):
    for name in ("wq", "wk", "wv", "wo"):
        scope.create(name, (length, length), "xavier")
    for name in ("bq", "bk", "bv", "bo"):
        scope.create(name, (length,), "zeros")
    scope.create("ln_q_g", (length,), "ones")
    scope.create("ln_q_b", (length,), "zeros")
    scope.create("ln_kv_g", (length,), "ones")
    scope.create("ln_kv_b", (length,), "zeros")


def cross_attention(q: Tensor, kv: Tensor, scope: Scope, heads: int) -> Tensor:
    """out = q + Proj(MHA(LN(q), LN(kv), LN(kv))); shapes (..., N, L)."""
    qn = F.layer_norm(q, scope["ln_q_g"], scope["ln_q_b"])
    kn = F.layer_norm(kv, scope["ln_kv_g"], scope["ln_kv_b"])
    qp = F.linear(qn, scope["wq"], scope["bq"])
    kp = F.linear(kn, scope["wk"], scope["bk"])
    vp = F.linear(kn, scope["wv"], scope["bv"])
    ctx = F.multi_head_attention(qp, kp, vp, heads)
    return q + F.linear(ctx, scope["wo"], scope["bo"])


def init_ffn(scope: Scope, length: int, hidden: int):
    scope.create("w1", (length, hidden), "xavier")
    scope.create("b1", (hidden,), "zeros")
    scope.create("w2", (hidden, length), "xavier")
    scope.create("b2", (length,), "zeros")
    scope.create("ln_g", (length,), "ones")
    scope.create("ln_b", (length,), "zeros")


def ffn(x: Tensor, scope: Scope) -> Tensor:
    """out = x + W2 GELU(W1 LN(x))."""
    h = F.gelu(F.linear(F.layer_norm(x, scope["ln_g"], scope["ln_b"]),
                        scope["w1"], scope["b1"]))
    return x + F.linear(h, scope["w2"], scope["b2"])


def zero_residual_projections(store, prefix: str = ""):
    """Test hook: zero every residual output projection under `prefix`."""
    for name, tensor in store.items():
        if not name.startswith(prefix):
            continue
        if name.endswith((".wo", ".bo")) or name.endswith((".w2", ".b2")):
            tensor.data[...] = 0.0
