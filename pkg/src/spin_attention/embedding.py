"""Pixel-to-spin embedding: patching, the 2-vector pixel map, and the
scaled-orthonormal linear lift to d dimensions, with exact inverses."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

DEGENERATE_EPS = 1e-12


@dataclass(frozen=True)
class PatchGeometry:
    """Patch layout of an H x W image split into side x side tokens."""

    height: int
    width: int
    side: int
    d: int = 0  # 0 means default to 2*a

    def __post_init__(self):
        if self.height % self.side or self.width % self.side:
            raise ValueError(
                f"image {self.height}x{self.width} not divisible by patch side {self.side}"
            )
        if self.d == 0:
            object.__setattr__(self, "d", 2 * self.a)
        if self.d < 2 * self.a:
            raise ValueError(f"d={self.d} < 2a={2 * self.a}")

    @property
    def a(self) -> int:
        """Pixels per patch."""
        return self.side * self.side

    @property
    def n_tokens(self) -> int:
        return (self.height // self.side) * (self.width // self.side)


@dataclass(frozen=True)
class EmbeddingMap:
    """Fixed random linear lift F (d x 2a) and its left inverse a*F^T."""

    f: np.ndarray
    f_pinv: np.ndarray
    seed: int


def embed_pixel(p: float) -> np.ndarray:
    """Map an intensity p in [0,1] to the unit 2-vector (p, 1-p)/|(p, 1-p)|."""
    if p < 0.0 or p > 1.0:
        warnings.warn(f"pixel intensity {p} outside [0,1], clamping")
        p = min(max(p, 0.0), 1.0)
    v = np.array([p, 1.0 - p])
    return v / np.sqrt(p * p + (1.0 - p) ** 2)


def invert_pixel(v: np.ndarray) -> float:
    """Invert embed_pixel: p = v1/(v1+v2), clamped to [0,1].

    A degenerate direction (v1+v2 ~ 0) maps to mid-gray 0.5 so evaluation
    never aborts on post-dynamics spins.
    """
    s = v[0] + v[1]
    if abs(s) < DEGENERATE_EPS:
        return 0.5
    return float(min(max(v[0] / s, 0.0), 1.0))


def build_embedding(seed: int, geom: PatchGeometry) -> EmbeddingMap:
    """Draw F's 2a columns from a seeded random orthonormal basis of d-space,
    scaled by 1/sqrt(a); the left inverse is then a*F^T."""
    a, d = geom.a, geom.d
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diag(r))  # make the basis draw sign-deterministic
    f = q[:, : 2 * a] / np.sqrt(a)
    return EmbeddingMap(f=f, f_pinv=a * f.T, seed=seed)


def image_to_patch_vectors(image: np.ndarray, geom: PatchGeometry) -> np.ndarray:
    """Pixels grouped per patch, row-major over the patch grid and within
    each patch; returns (N, a)."""
    gh, gw = geom.height // geom.side, geom.width // geom.side
    patches = image.reshape(gh, geom.side, gw, geom.side).transpose(0, 2, 1, 3)
    return patches.reshape(geom.n_tokens, geom.a)


def patch_vectors_to_image(patches: np.ndarray, geom: PatchGeometry) -> np.ndarray:
    gh, gw = geom.height // geom.side, geom.width // geom.side
    p = patches.reshape(gh, gw, geom.side, geom.side).transpose(0, 2, 1, 3)
    return p.reshape(geom.height, geom.width)


def _pixel_2vectors(pixels: np.ndarray) -> np.ndarray:
    """Vectorized embed_pixel over an arbitrary-shaped intensity array;
    returns shape pixels.shape + (2,)."""
    p = np.clip(pixels, 0.0, 1.0)
    v = np.stack([p, 1.0 - p], axis=-1)
    return v / np.sqrt(p * p + (1.0 - p) ** 2)[..., None]


def embed_images(images: np.ndarray, emb: EmbeddingMap, geom: PatchGeometry) -> np.ndarray:
    """Embed a batch (B,H,W) of images into spin sequences (B,N,d)."""
    images = np.asarray(images, dtype=np.float64)
    squeeze = images.ndim == 2
    if squeeze:
        images = images[None]
    b = images.shape[0]
    gh, gw = geom.height // geom.side, geom.width // geom.side
    patches = images.reshape(b, gh, geom.side, gw, geom.side).transpose(0, 1, 3, 2, 4)
    pixels = patches.reshape(b, geom.n_tokens, geom.a)
    s = _pixel_2vectors(pixels).reshape(b, geom.n_tokens, 2 * geom.a)
    x = s @ emb.f.T
    return x[0] if squeeze else x


def embed_image(image: np.ndarray, emb: EmbeddingMap, geom: PatchGeometry) -> np.ndarray:
    """Embed one image into a spin sequence (N,d); every spin is unit norm."""
    return embed_images(image, emb, geom)


def deembed_images(spins: np.ndarray, emb: EmbeddingMap, geom: PatchGeometry) -> np.ndarray:
    """Invert embedding for a batch (B,N,d) -> (B,H,W); exact round trip on
    freshly embedded images, clamped to [0,1] otherwise."""
    spins = np.asarray(spins, dtype=np.float64)
    squeeze = spins.ndim == 2
    if squeeze:
        spins = spins[None]
    b = spins.shape[0]
    s = spins @ emb.f_pinv.T  # (B, N, 2a)
    v = s.reshape(b, geom.n_tokens, geom.a, 2)
    tot = v[..., 0] + v[..., 1]
    degenerate = np.abs(tot) < DEGENERATE_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(degenerate, 0.5, v[..., 0] / np.where(degenerate, 1.0, tot))
    p = np.clip(p, 0.0, 1.0)
    gh, gw = geom.height // geom.side, geom.width // geom.side
    imgs = p.reshape(b, gh, gw, geom.side, geom.side).transpose(0, 1, 3, 2, 4)
    imgs = imgs.reshape(b, geom.height, geom.width)
    return imgs[0] if squeeze else imgs


def deembed_image(spins: np.ndarray, emb: EmbeddingMap, geom: PatchGeometry) -> np.ndarray:
    return deembed_images(spins, emb, geom)


def normalize_spins(x: np.ndarray, mode: str = "l2") -> np.ndarray:
    """Project spins (…,d) back to the unit sphere.

    Mode "l2" rescales to unit norm; mode "ln" subtracts the component mean,
    divides by the component std and scales by 1/sqrt(d), which also lands on
    the unit sphere. Both are idempotent.
    """
    x = np.asarray(x, dtype=np.float64)
    if mode == "l2":
        norm = np.linalg.norm(x, axis=-1, keepdims=True)
        if np.any(norm < DEGENERATE_EPS):
            raise ValueError("degenerate spin")
        return x / norm
    if mode == "ln":
        centered = x - x.mean(axis=-1, keepdims=True)
        std = centered.std(axis=-1, keepdims=True)
        if np.any(std < DEGENERATE_EPS):
            raise ValueError("degenerate spin")
        return centered / (std * np.sqrt(x.shape[-1]))
    raise ValueError(f"unknown normalization mode {mode!r}")


def normalize_spin(v: np.ndarray, mode: str = "l2") -> np.ndarray:
    return normalize_spins(v, mode)
