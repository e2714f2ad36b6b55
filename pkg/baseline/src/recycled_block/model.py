"""Single vision-transformer block applied recurrently (weight tying across
iterations), with trained linear embedding/de-embedding and sinusoidal
positional encoding added before and subtracted after the repetitions."""

from __future__ import annotations

import math

import torch
import torch.nn as nn


def sinusoidal_encoding(n_tokens: int, dim: int) -> torch.Tensor:
    pos = torch.arange(n_tokens, dtype=torch.float64).unsqueeze(1)
    idx = torch.arange(0, dim, 2, dtype=torch.float64)
    div = torch.exp(-idx * math.log(10000.0) / dim)
    enc = torch.zeros(n_tokens, dim, dtype=torch.float64)
    enc[:, 0::2] = torch.sin(pos * div)
    enc[:, 1::2] = torch.cos(pos * div[: enc[:, 1::2].shape[1]])
    return enc


class RecycledBlock(nn.Module):
    """LN -> self-attention -> residual -> LN -> MLP -> residual, one set of
    weights reused for every iteration; tau is a run-time argument, so the
    parameter count is independent of it."""

    def __init__(self, patch_dim: int, n_tokens: int, d_model: int = 64,
                 n_heads: int = 4, mlp_ratio: int = 4):
        super().__init__()
        self.n_tokens = n_tokens
        self.patch_dim = patch_dim
        self.embed = nn.Linear(patch_dim, d_model)
        self.deembed = nn.Linear(d_model, patch_dim)  # separate trained output map
        self.ln1 = nn.LayerNorm(d_model)
        self.ln2 = nn.LayerNorm(d_model)
        self.attn = nn.MultiheadAttention(d_model, n_heads, batch_first=True)
        self.mlp = nn.Sequential(
            nn.Linear(d_model, mlp_ratio * d_model),
            nn.GELU(),
            nn.Linear(mlp_ratio * d_model, d_model),
        )
        self.register_buffer("pos", sinusoidal_encoding(n_tokens, d_model).float())

    def block_step(self, x: torch.Tensor) -> torch.Tensor:
        h = self.ln1(x)
        u = self.attn(h, h, h, need_weights=False)[0] + x
        return self.mlp(self.ln2(u)) + u

    def forward(self, patches: torch.Tensor, tau: int) -> torch.Tensor:
        """patches: (B, N, patch_dim) corrupted input; returns predicted
        patches after tau weight-tied iterations."""
        x = self.embed(patches) + self.pos
        for _ in range(tau):
            x = self.block_step(x)
        x = x - self.pos  # remove positional encoding before the output map
        return self.deembed(x)

    def iterate_outputs(self, patches: torch.Tensor, n_steps: int) -> list[torch.Tensor]:
        """Predicted patches after each of 1..n_steps iterations."""
        x = self.embed(patches) + self.pos
        outs = []
        for _ in range(n_steps):
            x = self.block_step(x)
            outs.append(self.deembed(x - self.pos))
        return outs
