"""Masked-prediction and denoising harnesses: corruption, MSE-vs-iteration
curves, within-patch variance statistics, and the long-run attractor probe."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .dynamics import CouplingTensor, DynamicsConfig, batch_update
from .embedding import (
    EmbeddingMap,
    PatchGeometry,
    deembed_images,
    embed_images,
    image_to_patch_vectors,
)

EVAL_CHUNK = 32  # sequences per vectorized dynamics pass


@dataclass
class CorruptionSpec:
    kind: str = "mask"  # mask | noise
    mask_fraction: float = 0.3
    noise_variance: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("mask", "noise"):
            raise ValueError(f"unknown corruption kind {self.kind!r}")
        if not 0.0 <= self.mask_fraction <= 1.0:
            raise ValueError("mask_fraction must be in [0,1]")
        if self.noise_variance < 0.0:
            raise ValueError("noise_variance must be >= 0")


@dataclass
class Curve:
    """Mean MSE against iteration index over a test set.

    t_index_convention records what t=1 means: "corrupted_first" (denoising;
    t=1 is the corrupted input, t=2 the first update) or "update_first"
    (masking; t=1 is the first update).
    """

    t: np.ndarray
    mean_mse: np.ndarray
    std_mse: np.ndarray
    t_index_convention: str
    baseline_mse: float  # mean MSE of the corrupted inputs themselves

    @property
    def argmin_t(self) -> int:
        return int(self.t[int(np.argmin(self.mean_mse))])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["t", "mean_mse", "std_mse"])
            for t, m, s in zip(self.t, self.mean_mse, self.std_mse):
                w.writerow([int(t), f"{m:.10g}", f"{s:.10g}"])


@dataclass
class Trajectory:
    """Per-iteration snapshots for a single sequence."""

    states: np.ndarray  # (T, N, d)
    images: np.ndarray  # (T, H, W)
    mse: np.ndarray  # (T,)
    t_index_convention: str


@dataclass
class AttractorReport:
    pairwise: np.ndarray  # (M, M) cosine similarities of final images
    input_pairwise: np.ndarray  # (M, M) cosine similarities of the inputs
    to_mean_image: np.ndarray | None  # (M,) similarity to the train mean image
    finals: np.ndarray  # (M, H, W)


def mask_tokens(image: np.ndarray, geom: PatchGeometry, spec: CorruptionSpec) -> np.ndarray:
    """Zero a seeded uniform-random subset of floor(fraction*N) whole patches."""
    rng = np.random.default_rng(spec.seed)
    n_masked = int(np.floor(spec.mask_fraction * geom.n_tokens))
    chosen = rng.choice(geom.n_tokens, size=n_masked, replace=False)
    patches = image_to_patch_vectors(np.array(image, dtype=np.float64), geom).copy()
    patches[chosen] = 0.0
    gh, gw = geom.height // geom.side, geom.width // geom.side
    out = patches.reshape(gh, gw, geom.side, geom.side).transpose(0, 2, 1, 3)
    return out.reshape(geom.height, geom.width)


def add_noise(image: np.ndarray, spec: CorruptionSpec) -> np.ndarray:
    """Add i.i.d. Gaussian noise, rescale about the noisy mean so the pixel
    variance matches the clean image's, then clamp to [0,1]."""
    img = np.asarray(image, dtype=np.float64)
    rng = np.random.default_rng(spec.seed)
    noisy = img + rng.normal(0.0, np.sqrt(spec.noise_variance), size=img.shape)
    var_clean, var_noisy = img.var(), noisy.var()
    if var_clean > 0.0 and var_noisy > 0.0:
        m = noisy.mean()
        noisy = m + (noisy - m) * np.sqrt(var_clean / var_noisy)
    return np.clip(noisy, 0.0, 1.0)


def corrupt(image: np.ndarray, geom: PatchGeometry, spec: CorruptionSpec, seed=None) -> np.ndarray:
    s = spec if seed is None else CorruptionSpec(spec.kind, spec.mask_fraction, spec.noise_variance, seed)
    if s.kind == "mask":
        return mask_tokens(image, geom, s)
    return add_noise(image, s)


def mse(image_a: np.ndarray, image_b: np.ndarray) -> float:
    a, b = np.asarray(image_a, dtype=np.float64), np.asarray(image_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def _batch_mse(images_a: np.ndarray, images_b: np.ndarray) -> np.ndarray:
    return ((images_a - images_b) ** 2).mean(axis=(1, 2))


def evaluate_curve(
    coup: CouplingTensor,
    emb: EmbeddingMap,
    geom: PatchGeometry,
    test_images: np.ndarray,
    spec: CorruptionSpec,
    n_iters: int,
    cfg: DynamicsConfig | None = None,
    keep_images_for: int = 0,
):
    """Corrupt every test image, run the dynamics, de-embed each step and
    record the mean MSE curve against the clean originals.

    Indexing: for denoising t=1 is the corrupted input and updates start at
    t=2; for masking t=1 is the first update. Optionally keeps per-iteration
    images for the first keep_images_for test images (for sample strips).
    Returns (Curve, kept) where kept is a list of (clean, corrupted, images
    (T_updates, H, W)) triples.
    """
    cfg = cfg or DynamicsConfig()
    images = np.asarray(test_images, dtype=np.float64)
    m = images.shape[0]
    corrupted = np.stack([corrupt(img, geom, spec, seed=spec.seed + k) for k, img in enumerate(images)])
    base = _batch_mse(corrupted, images)

    n_updates = n_iters if spec.kind == "mask" else max(n_iters - 1, 0)
    per_t = np.empty((n_updates, m))
    kept: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    kept_imgs = np.empty((min(keep_images_for, m), n_updates, geom.height, geom.width))
    for start in range(0, m, EVAL_CHUNK):
        sl = slice(start, min(start + EVAL_CHUNK, m))
        x = embed_images(corrupted[sl], emb, geom)
        for t in range(n_updates):
            x = batch_update(x, coup.j, cfg.lambda_eval, cfg.gamma, cfg.norm_mode)
            out = deembed_images(x, emb, geom)
            per_t[t, sl] = _batch_mse(out, images[sl])
            if start < keep_images_for:
                upto = min(keep_images_for, sl.stop)
                kept_imgs[start:upto, t] = out[: upto - start]

    if spec.kind == "noise":
        mean = np.concatenate([[base.mean()], per_t.mean(axis=1)])
        std = np.concatenate([[base.std()], per_t.std(axis=1)])
        convention = "corrupted_first"
    else:
        mean, std = per_t.mean(axis=1), per_t.std(axis=1)
        convention = "update_first"
    curve = Curve(
        t=np.arange(1, len(mean) + 1),
        mean_mse=mean,
        std_mse=std,
        t_index_convention=convention,
        baseline_mse=float(base.mean()),
    )
    for k in range(kept_imgs.shape[0]):
        kept.append((images[k], corrupted[k], kept_imgs[k]))
    return curve, kept


def predictions_at(
    coup: CouplingTensor,
    emb: EmbeddingMap,
    geom: PatchGeometry,
    test_images: np.ndarray,
    spec: CorruptionSpec,
    n_updates: int,
    cfg: DynamicsConfig | None = None,
) -> np.ndarray:
    """De-embedded predictions after a fixed number of updates, (M, H, W)."""
    cfg = cfg or DynamicsConfig()
    images = np.asarray(test_images, dtype=np.float64)
    out = np.empty_like(images)
    for start in range(0, images.shape[0], EVAL_CHUNK):
        sl = slice(start, min(start + EVAL_CHUNK, images.shape[0]))
        corr = np.stack([corrupt(img, geom, spec, seed=spec.seed + k)
                         for k, img in enumerate(images[sl], start=start)])
        x = embed_images(corr, emb, geom)
        for _ in range(n_updates):
            x = batch_update(x, coup.j, cfg.lambda_eval, cfg.gamma, cfg.norm_mode)
        out[sl] = deembed_images(x, emb, geom)
    return out


def patch_variance_histogram(
    predicted: np.ndarray, geom: PatchGeometry, bins: int = 30
) -> tuple[np.ndarray, np.ndarray]:
    """Normalized histogram of the per-patch pixel variance over all images
    and patches. Returns (bin_edges, mass) with mass summing to 1."""
    predicted = np.asarray(predicted, dtype=np.float64)
    if predicted.ndim == 2:
        predicted = predicted[None]
    variances = np.concatenate(
        [image_to_patch_vectors(img, geom).var(axis=1) for img in predicted]
    )
    hi = max(float(variances.max()), 1e-12)
    counts, edges = np.histogram(variances, bins=bins, range=(0.0, hi))
    return edges, counts / counts.sum()


def patch_variances(predicted: np.ndarray, geom: PatchGeometry) -> np.ndarray:
    """Flat array of per-patch pixel variances over a stack of images."""
    predicted = np.asarray(predicted, dtype=np.float64)
    if predicted.ndim == 2:
        predicted = predicted[None]
    return np.concatenate([image_to_patch_vectors(img, geom).var(axis=1) for img in predicted])


def _cosine_matrix(flat: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(flat, axis=1, keepdims=True)
    norms = np.where(norms < 1e-12, 1.0, norms)
    u = flat / norms
    return u @ u.T


def attractor_probe(
    coup: CouplingTensor,
    emb: EmbeddingMap,
    geom: PatchGeometry,
    inputs: np.ndarray,
    cfg: DynamicsConfig | None = None,
    n_iters: int = 200,
    train_mean_image: np.ndarray | None = None,
) -> AttractorReport:
    """Run the dynamics for many iterations from each input and report the
    pairwise cosine similarities of the final de-embedded images, plus their
    similarity to the train-set mean image when given."""
    cfg = cfg or DynamicsConfig()
    inputs = np.asarray(inputs, dtype=np.float64)
    x = embed_images(inputs, emb, geom)
    for _ in range(n_iters):
        x = batch_update(x, coup.j, cfg.lambda_eval, cfg.gamma, cfg.norm_mode)
    finals = deembed_images(x, emb, geom)
    m = finals.shape[0]
    flat = finals.reshape(m, -1)
    to_mean = None
    if train_mean_image is not None:
        mean_flat = np.asarray(train_mean_image, dtype=np.float64).reshape(1, -1)
        both = np.concatenate([flat, mean_flat])
        to_mean = _cosine_matrix(both)[:m, m]
    return AttractorReport(
        pairwise=_cosine_matrix(flat),
        input_pairwise=_cosine_matrix(inputs.reshape(m, -1)),
        to_mean_image=to_mean,
        finals=finals,
    )


def mean_offdiag(sim: np.ndarray) -> float:
    """Mean of the off-diagonal entries of a square similarity matrix."""
    m = sim.shape[0]
    mask = ~np.eye(m, dtype=bool)
    return float(sim[mask].mean())
