"""A compact encoder-decoder transformer with optional key/value prefixes.

Prefix tuning follows the usual reparameterization: one trainable
embedding matrix is pushed through a shared two-layer MLP whose output is
split into per-attention-site key and value prefixes, prepended to the
projected keys and values of every attention block (encoder self,
decoder self and cross attention).  With the prefix encoder active the
base model's weights can stay frozen.
"""

from __future__ import annotations

import math

import torch
from torch import nn

from .config import ModelDims

MAX_POSITIONS = 256


class PrefixEncoder(nn.Module):
    def __init__(self, n_sites: int, prefix_len: int, d_model: int):
        super().__init__()
        self.n_sites = n_sites
        self.prefix_len = prefix_len
        self.d_model = d_model
        self.embedding = nn.Parameter(torch.randn(prefix_len, d_model) * 0.1)
        self.mlp = nn.Sequential(
            nn.Linear(d_model, d_model),
            nn.Tanh(),
            nn.Linear(d_model, n_sites * 2 * d_model),
        )

    def forward(self) -> torch.Tensor:
        # (n_sites, 2, C, d_model)
        out = self.mlp(self.embedding)
        return out.view(self.prefix_len, self.n_sites, 2, self.d_model).permute(1, 2, 0, 3)


class MultiHeadAttention(nn.Module):
    def __init__(self, d_model: int, n_heads: int):
        super().__init__()
        assert d_model % n_heads == 0
        self.n_heads = n_heads
        self.head_dim = d_model // n_heads
        self.q_proj = nn.Linear(d_model, d_model)
        self.k_proj = nn.Linear(d_model, d_model)
        self.v_proj = nn.Linear(d_model, d_model)
        self.o_proj = nn.Linear(d_model, d_model)

    def _split(self, x: torch.Tensor) -> torch.Tensor:
        b, t, _ = x.shape
        return x.view(b, t, self.n_heads, self.head_dim).transpose(1, 2)

    def forward(
        self,
        q_in: torch.Tensor,
        kv_in: torch.Tensor,
        key_mask: torch.Tensor | None = None,
        causal: bool = False,
        prefix: torch.Tensor | None = None,
    ) -> torch.Tensor:
        b, t_q, _ = q_in.shape
        t_kv = kv_in.shape[1]
        q = self._split(self.q_proj(q_in))
        k = self._split(self.k_proj(kv_in))
        v = self._split(self.v_proj(kv_in))
        c = 0
        if prefix is not None:
            c = prefix.shape[1]
            pk = self._split(prefix[0].unsqueeze(0).expand(b, -1, -1))
            pv = self._split(prefix[1].unsqueeze(0).expand(b, -1, -1))
            k = torch.cat([pk, k], dim=2)
            v = torch.cat([pv, v], dim=2)
        scores = q @ k.transpose(-1, -2) / math.sqrt(self.head_dim)
        if key_mask is not None:
            full = key_mask
            if c:
                full = torch.cat([key_mask.new_ones(b, c), key_mask], dim=1)
            scores = scores.masked_fill(~full[:, None, None, :], float("-inf"))
        if causal:
            allowed = torch.ones(t_q, c + t_kv, dtype=torch.bool, device=q_in.device)
            allowed[:, c:] = torch.tril(torch.ones(t_q, t_kv, dtype=torch.bool, device=q_in.device))
            scores = scores.masked_fill(~allowed[None, None, :, :], float("-inf"))
        attn = torch.softmax(scores, dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(b, t_q, -1)
        return self.o_proj(out)


class FeedForward(nn.Module):
    def __init__(self, d_model: int, d_ff: int):
        super().__init__()
        self.net = nn.Sequential(nn.Linear(d_model, d_ff), nn.ReLU(), nn.Linear(d_ff, d_model))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)


class EncoderLayer(nn.Module):
    def __init__(self, dims: ModelDims):
        super().__init__()
        self.attn = MultiHeadAttention(dims.d_model, dims.n_heads)
        self.ff = FeedForward(dims.d_model, dims.d_ff)
        self.norm1 = nn.LayerNorm(dims.d_model)
        self.norm2 = nn.LayerNorm(dims.d_model)

    def forward(self, x, src_mask, prefix):
        h = self.norm1(x)
        x = x + self.attn(h, h, key_mask=src_mask, prefix=prefix)
        x = x + self.ff(self.norm2(x))
        return x


class DecoderLayer(nn.Module):
    def __init__(self, dims: ModelDims):
        super().__init__()
        self.self_attn = MultiHeadAttention(dims.d_model, dims.n_heads)
        self.cross_attn = MultiHeadAttention(dims.d_model, dims.n_heads)
        self.ff = FeedForward(dims.d_model, dims.d_ff)
        self.norm1 = nn.LayerNorm(dims.d_model)
        self.norm2 = nn.LayerNorm(dims.d_model)
        self.norm3 = nn.LayerNorm(dims.d_model)

    def forward(self, x, memory, src_mask, self_prefix, cross_prefix):
        h = self.norm1(x)
        x = x + self.self_attn(h, h, causal=True, prefix=self_prefix)
        x = x + self.cross_attn(self.norm2(x), memory, key_mask=src_mask, prefix=cross_prefix)
        x = x + self.ff(self.norm3(x))
        return x


class Seq2SeqTransformer(nn.Module):
    """Text-to-text transformer; the prefix encoder is the only non-base part."""

    def __init__(self, vocab_size: int, dims: ModelDims, prefix_len: int = 0):
        super().__init__()
        self.dims = dims
        self.embed = nn.Embedding(vocab_size, dims.d_model)
        self.pos = nn.Embedding(MAX_POSITIONS, dims.d_model)
        self.encoder = nn.ModuleList(EncoderLayer(dims) for _ in range(dims.n_layers))
        self.decoder = nn.ModuleList(DecoderLayer(dims) for _ in range(dims.n_layers))
        self.final_norm = nn.LayerNorm(dims.d_model)
        self.lm_head = nn.Linear(dims.d_model, vocab_size)
        self.prefix_encoder = (
            PrefixEncoder(3 * dims.n_layers, prefix_len, dims.d_model) if prefix_len else None
        )

    def base_parameters(self):
        prefix_ids = (
            {id(p) for p in self.prefix_encoder.parameters()} if self.prefix_encoder else set()
        )
        return [p for p in self.parameters() if id(p) not in prefix_ids]

    def prefix_parameters(self):
        return list(self.prefix_encoder.parameters()) if self.prefix_encoder else []

    def _embed(self, ids: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.shape[1], device=ids.device)
        return self.embed(ids) + self.pos(positions)[None, :, :]

    def _prefixes(self):
        if self.prefix_encoder is None:
            return [None] * (3 * self.dims.n_layers)
        return list(self.prefix_encoder())

    def forward(self, src: torch.Tensor, src_mask: torch.Tensor, dec_in: torch.Tensor) -> torch.Tensor:
        prefixes = self._prefixes()
        x = self._embed(src)
        for i, layer in enumerate(self.encoder):
            x = layer(x, src_mask, prefixes[i])
        memory = x
        y = self._embed(dec_in)
        base = self.dims.n_layers
        for j, layer in enumerate(self.decoder):
            y = layer(y, memory, src_mask, prefixes[base + 2 * j], prefixes[base + 2 * j + 1])
        return self.lm_head(self.final_norm(y))

    @torch.no_grad()
    def greedy_decode(self, src: torch.Tensor, src_mask: torch.Tensor, bos: int, eos: int,
                      max_len: int) -> list[list[int]]:
        self.eval()
        b = src.shape[0]
        out = torch.full((b, 1), bos, dtype=torch.long, device=src.device)
        finished = torch.zeros(b, dtype=torch.bool, device=src.device)
        for _ in range(max_len):
            logits = self.forward(src, src_mask, out)
            nxt = logits[:, -1, :].argmax(dim=-1)
            nxt = torch.where(finished, torch.full_like(nxt, eos), nxt)
            out = torch.cat([out, nxt[:, None]], dim=1)
            finished = finished | nxt.eq(eos)
            if bool(finished.all()):
                break
        return [row[1:].tolist() for row in out]
