"""Per-task backprop training of the recycled block: corrupt, iterate the
block tau ~ Unif{3..7} times, minimize pixel MSE against the clean image."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import torch

from .data import corrupt, to_patches
from .model import RecycledBlock


@dataclass
class RecyclerConfig:
    side: int = 4
    d_model: int = 64
    n_heads: int = 4
    mlp_ratio: int = 4
    tau_min: int = 3
    tau_max: int = 7
    epochs: int = 100
    batch_size: int = 256
    learning_rate: float = 1e-3
    mask_fraction: float = 0.3
    noise_variance: float = 0.7
    seed: int = 0


def train_recycled(
    images: np.ndarray, task: str, cfg: RecyclerConfig, log=None
) -> tuple[RecycledBlock, list[float]]:
    """Returns the trained block and the per-epoch mean loss sequence."""
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    h, w = images.shape[1:]
    n_tokens = (h // cfg.side) * (w // cfg.side)
    model = RecycledBlock(cfg.side * cfg.side, n_tokens, cfg.d_model,
                          cfg.n_heads, cfg.mlp_ratio)
    opt = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, T_max=max(cfg.epochs, 1))
    clean = torch.from_numpy(to_patches(images, cfg.side)).float()
    losses = []
    t0 = time.perf_counter()
    for epoch in range(cfg.epochs):
        order = rng.permutation(images.shape[0])
        epoch_losses = []
        for start in range(0, images.shape[0], cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            corrupted = corrupt(images[idx], task, cfg.side, rng,
                                cfg.mask_fraction, cfg.noise_variance)
            tau = int(rng.integers(cfg.tau_min, cfg.tau_max + 1))
            pred = model(torch.from_numpy(corrupted).float(), tau)
            loss = torch.mean((pred - clean[idx]) ** 2)
            if not torch.isfinite(loss):
                raise FloatingPointError("training diverged: non-finite loss")
            opt.zero_grad()
            loss.backward()
            opt.step()
            epoch_losses.append(float(loss.detach()))
        sched.step()
        losses.append(float(np.mean(epoch_losses)))
        if log is not None:
            log(f"epoch {epoch + 1}/{cfg.epochs}  loss {losses[-1]:.6f}")
    if log is not None:
        log(f"trained in {time.perf_counter() - t0:.0f}s")
    return model, losses
