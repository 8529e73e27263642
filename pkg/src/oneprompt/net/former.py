"""The One-Prompt Former decoder block.

Two parallel branches: the query branch attends to the running state and the
template skip feature; the template branch parses the prompt and attends to
the query feature. A fusion cross-attention transfers the prompted template
segmentation into the query domain, followed by self-attention and an FFN.
"""

from __future__ import annotations

from ..numerics import Tensor
from ..numerics.layers import cross_attention, ffn, init_attention, init_ffn
from .config import ModelConfig
from .parser import init_parser, prompt_parser

_ATTN = ("ca_qs", "ca_qt", "ca_tq", "ca_fuse", "sa")


def init_former_block(scope, cfg: ModelConfig):
    for name in _ATTN:
        init_attention(scope.scope(name), cfg.length)
    init_ffn(scope.scope("ffn"), cfg.length, cfg.ffn_hidden)
    init_parser(scope.scope("parser"), cfg)


def former_block(e_q_skip: Tensor, e_t_skip: Tensor, state: Tensor,
                 p1: Tensor, p2: Tensor, scope, cfg: ModelConfig) -> Tensor:
    heads = cfg.heads
    # query branch
    u1 = cross_attention(e_q_skip, state, scope.scope("ca_qs"), heads)
    u2 = cross_attention(u1, e_t_skip, scope.scope("ca_qt"), heads)
    # template branch (parallel: consumes the raw query skip, not u1)
    v1 = prompt_parser(e_t_skip, e_q_skip, p1, p2, scope.scope("parser"), cfg)
    v2 = cross_attention(v1, e_q_skip, scope.scope("ca_tq"), heads)
    # fusion
    z = cross_attention(u2, v2, scope.scope("ca_fuse"), heads)
    z = cross_attention(z, z, scope.scope("sa"), heads)
    return ffn(z, scope.scope("ffn"))
