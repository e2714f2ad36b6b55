"""Evaluation of the recycled block with the same CSV schema as the main
model's curves, so the two overlay directly."""

from __future__ import annotations

import csv

import numpy as np
import torch

from .data import corrupt, from_patches, to_patches
from .model import RecycledBlock


def eval_recycled(
    model: RecycledBlock,
    images: np.ndarray,
    task: str,
    n_iters: int,
    side: int,
    seed: int = 0,
    mask_fraction: float = 0.3,
    noise_variance: float = 0.7,
    chunk: int = 128,
):
    """Per-t mean/std MSE over the test set. Indexing follows the main
    harness: for denoising t=1 is the corrupted input, for masking t=1 is the
    first iteration. Returns (t, mean, std, per_image_best_preds)."""
    rng = np.random.default_rng(seed)
    h, w = images.shape[1:]
    corrupted = corrupt(images, task, side, rng, mask_fraction, noise_variance)
    base = ((from_patches(corrupted, h, w, side) - images) ** 2).mean(axis=(1, 2))

    n_updates = n_iters if task == "mask" else max(n_iters - 1, 0)
    per_t = np.empty((n_updates, images.shape[0]))
    preds_by_t = []
    model.eval()
    with torch.no_grad():
        for start in range(0, images.shape[0], chunk):
            sl = slice(start, min(start + chunk, images.shape[0]))
            outs = model.iterate_outputs(torch.from_numpy(corrupted[sl]).float(), n_updates)
            for t, out in enumerate(outs):
                rec = from_patches(out.double().numpy(), h, w, side)
                per_t[t, sl] = ((np.clip(rec, 0.0, 1.0) - images[sl]) ** 2).mean(axis=(1, 2))
                if start == 0:
                    preds_by_t.append(rec)

    if task == "denoise":
        mean = np.concatenate([[base.mean()], per_t.mean(axis=1)])
        std = np.concatenate([[base.std()], per_t.std(axis=1)])
    else:
        mean, std = per_t.mean(axis=1), per_t.std(axis=1)
    return np.arange(1, len(mean) + 1), mean, std, preds_by_t


def predictions_at(model: RecycledBlock, images: np.ndarray, task: str,
                   n_updates: int, side: int, seed: int = 0,
                   chunk: int = 128) -> np.ndarray:
    """Clipped reconstructions after a fixed number of iterations."""
    rng = np.random.default_rng(seed)
    h, w = images.shape[1:]
    corrupted = corrupt(images, task, side, rng)
    out = np.empty_like(images)
    model.eval()
    with torch.no_grad():
        for start in range(0, images.shape[0], chunk):
            sl = slice(start, min(start + chunk, images.shape[0]))
            pred = model(torch.from_numpy(corrupted[sl]).float(), n_updates)
            out[sl] = np.clip(from_patches(pred.double().numpy(), h, w, side), 0.0, 1.0)
    return out


def write_curve_csv(path, t, mean, std) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t", "mean_mse", "std_mse"])
        for ti, m, s in zip(t, mean, std):
            w.writerow([int(ti), f"{m:.10g}", f"{s:.10g}"])


def patch_variances(images: np.ndarray, side: int) -> np.ndarray:
    return to_patches(images, side).var(axis=2).ravel()


def write_variance_csv(path, variances: np.ndarray, bins: int = 30) -> None:
    hi = max(float(variances.max()), 1e-12)
    counts, edges = np.histogram(variances, bins=bins, range=(0.0, hi))
    mass = counts / counts.sum()
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["bin_left", "bin_right", "mass"])
        for lo, hi_, m in zip(edges[:-1], edges[1:], mass):
            w.writerow([f"{lo:.10g}", f"{hi_:.10g}", f"{m:.10g}"])
