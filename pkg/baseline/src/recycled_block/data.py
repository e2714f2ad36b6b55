"""Minimal IDX reading and patch/corruption utilities for the benchmark.

Interchange with the main model happens through files (IDX data directory,
CSV curves, PGM images), so this package carries its own small loader.
"""

from __future__ import annotations

import gzip
import struct
from pathlib import Path

import numpy as np

TRAIN_IMAGES = "train-images-idx3-ubyte"
TRAIN_LABELS = "train-labels-idx1-ubyte"
TEST_IMAGES = "t10k-images-idx3-ubyte"
TEST_LABELS = "t10k-labels-idx1-ubyte"


def _read(path: Path) -> bytes:
    raw = path.read_bytes()
    return gzip.decompress(raw) if raw[:2] == b"\x1f\x8b" else raw


def load_images(path) -> np.ndarray:
    raw = _read(Path(path))
    magic, n, h, w = struct.unpack(">IIII", raw[:16])
    if magic != 0x00000803:
        raise ValueError(f"{path}: bad IDX image magic 0x{magic:08x}")
    pixels = np.frombuffer(raw, dtype=np.uint8, count=n * h * w, offset=16)
    return pixels.reshape(n, h, w).astype(np.float64) / 255.0


def load_data_dir(data_dir) -> tuple[np.ndarray, np.ndarray]:
    d = Path(data_dir)
    return load_images(d / TRAIN_IMAGES), load_images(d / TEST_IMAGES)


def to_patches(images: np.ndarray, side: int) -> np.ndarray:
    """(B, H, W) -> (B, N, side*side), row-major patches and pixels."""
    b, h, w = images.shape
    gh, gw = h // side, w // side
    p = images.reshape(b, gh, side, gw, side).transpose(0, 1, 3, 2, 4)
    return p.reshape(b, gh * gw, side * side)


def from_patches(patches: np.ndarray, h: int, w: int, side: int) -> np.ndarray:
    b = patches.shape[0]
    gh, gw = h // side, w // side
    p = patches.reshape(b, gh, gw, side, side).transpose(0, 1, 3, 2, 4)
    return p.reshape(b, h, w)


def mask_patches(patches: np.ndarray, fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Zero floor(fraction*N) random whole patches per image."""
    out = patches.copy()
    n = patches.shape[1]
    k = int(np.floor(fraction * n))
    for img in out:
        img[rng.choice(n, size=k, replace=False)] = 0.0
    return out


def add_noise(images: np.ndarray, variance: float, rng: np.random.Generator) -> np.ndarray:
    """Per-pixel Gaussian noise, variance-matched rescaling about the noisy
    mean, clamp to [0,1]; applied image by image."""
    out = np.empty_like(images)
    for k, img in enumerate(images):
        noisy = img + rng.normal(0.0, np.sqrt(variance), size=img.shape)
        if img.var() > 0 and noisy.var() > 0:
            m = noisy.mean()
            noisy = m + (noisy - m) * np.sqrt(img.var() / noisy.var())
        out[k] = np.clip(noisy, 0.0, 1.0)
    return out


def corrupt(images: np.ndarray, task: str, side: int, rng: np.random.Generator,
            mask_fraction: float = 0.3, noise_variance: float = 0.7) -> np.ndarray:
    """Task-specific corruption in patch space: (B,H,W) -> (B,N,a)."""
    if task == "mask":
        return mask_patches(to_patches(images, side), mask_fraction, rng)
    if task == "denoise":
        return to_patches(add_noise(images, noise_variance, rng), side)
    raise ValueError(f"unknown task {task!r}")
