"""Backprop-free trainer: SGD on the summed token energies of the data with
analytic coupling gradients, global gradient clipping, diagonal zeroing and
norm fixing."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .data import ImageCorpus
from .dynamics import CouplingTensor, _batch_scores, _softmax_rows, batch_energy, zero_diagonal
from .embedding import EmbeddingMap, PatchGeometry, embed_images


@dataclass
class TrainConfig:
    epochs: int = 20
    batch_size: int = 32
    lambda_train: float = 5.0
    lambda_eval: float = 1.0
    learning_rate: float = 0.01
    clip_threshold: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if min(self.batch_size, self.lambda_train, self.lambda_eval,
               self.learning_rate, self.clip_threshold) <= 0 or self.epochs < 0:
            raise ValueError("TrainConfig fields must be positive")
        if self.lambda_eval > self.lambda_train:
            raise ValueError("lambda_eval must not exceed lambda_train")


@dataclass
class TrainReport:
    mean_loss: list[float] = field(default_factory=list)
    grad_norm_mean: list[float] = field(default_factory=list)
    clip_events: list[int] = field(default_factory=list)
    wall_time: float = 0.0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["epoch", "mean_loss", "grad_norm_mean", "clip_events"])
            for e, (l, g, c) in enumerate(
                zip(self.mean_loss, self.grad_norm_mean, self.clip_events), start=1
            ):
                w.writerow([e, f"{l:.10g}", f"{g:.10g}", c])


def init_couplings(seed: int, n_tokens: int, d: int, lam: float = 1.0) -> CouplingTensor:
    """Entries i.i.d. uniform in [-1/(2d), 1/(2d)], diagonal blocks zeroed,
    reference norm recorded after zeroing."""
    if n_tokens < 2 or d < 1:
        raise ValueError("need at least 2 tokens and d >= 1")
    rng = np.random.default_rng(seed)
    bound = 1.0 / (2.0 * d)
    j = rng.uniform(-bound, bound, size=(n_tokens, n_tokens, d, d))
    zero_diagonal(j)
    return CouplingTensor(j=j, lam=lam, norm_ref=float(np.linalg.norm(j)))


def pseudolikelihood_loss(batch: np.ndarray, coup: CouplingTensor, lam: float | None = None) -> float:
    """Mean over the batch of the per-sequence total energy."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim == 2:
        batch = batch[None]
    if batch.shape[0] == 0:
        raise ValueError("empty batch")
    lam = coup.lam if lam is None else lam
    return float(batch_energy(batch, coup.j, lam).mean())


def coupling_gradient(batch: np.ndarray, coup: CouplingTensor, lam: float | None = None) -> np.ndarray:
    """Analytic gradient of pseudolikelihood_loss w.r.t. the couplings:
    block (i,j) is -lam * mean_b alpha[b,i,j] * outer(x_i, x_j); the diagonal
    stays zero."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim == 2:
        batch = batch[None]
    lam = coup.lam if lam is None else lam
    bsz, n, d = batch.shape
    alpha = _softmax_rows(_batch_scores(batch, coup.j, lam))
    # per source token jj: contract batch out of alpha[b,i,jj]*x[b,i,:] vs x[b,jj,:]
    w = alpha[:, :, :, None] * batch[:, :, None, :]  # (B, i, jj, d)
    wt = np.ascontiguousarray(w.transpose(2, 1, 3, 0)).reshape(n, n * d, bsz)
    xj = np.ascontiguousarray(batch.transpose(1, 0, 2))  # (jj, B, d)
    g = np.matmul(wt, xj).reshape(n, n, d, d).transpose(1, 0, 2, 3)
    g = np.ascontiguousarray(g) * (-lam / bsz)
    zero_diagonal(g)
    return g


def sgd_step(coup: CouplingTensor, grad: np.ndarray, cfg: TrainConfig) -> tuple[CouplingTensor, bool]:
    """One SGD update in place: clip the gradient to the global L2 threshold,
    step, zero the diagonal blocks, rescale the tensor back to its reference
    norm. Returns the tensor and whether clipping fired."""
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite entries in coupling gradient; step aborted")
    gnorm = float(np.linalg.norm(grad))
    clipped = gnorm > cfg.clip_threshold
    scale = cfg.clip_threshold / gnorm if clipped else 1.0
    coup.j -= (cfg.learning_rate * scale) * grad
    zero_diagonal(coup.j)
    coup.j *= coup.norm_ref / np.linalg.norm(coup.j)
    return coup, clipped


def train(
    corpus: ImageCorpus,
    emb: EmbeddingMap,
    geom: PatchGeometry,
    cfg: TrainConfig,
    log=None,
) -> tuple[CouplingTensor, TrainReport]:
    """Full training loop: shuffle per epoch with a seeded RNG, embed batches,
    apply the analytic gradient and the regularized SGD step. Touches neither
    labels nor any corruption process. Returns the trained tensor with lam set
    to lambda_eval, plus the per-epoch report."""
    if len(corpus) == 0:
        raise ValueError("empty training corpus")
    t0 = time.perf_counter()
    coup = init_couplings(cfg.seed, geom.n_tokens, geom.d, lam=cfg.lambda_train)
    spins = embed_images(corpus.images, emb, geom)  # (P, N, d), embed once
    rng = np.random.default_rng(cfg.seed)
    report = TrainReport()
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(corpus))
        losses, gnorms, clips = [], [], 0
        for start in range(0, len(corpus), cfg.batch_size):
            batch = spins[order[start : start + cfg.batch_size]]
            losses.append(pseudolikelihood_loss(batch, coup, cfg.lambda_train))
            grad = coupling_gradient(batch, coup, cfg.lambda_train)
            gnorms.append(float(np.linalg.norm(grad)))
            _, clipped = sgd_step(coup, grad, cfg)
            clips += int(clipped)
        report.mean_loss.append(float(np.mean(losses)))
        report.grad_norm_mean.append(float(np.mean(gnorms)))
        report.clip_events.append(clips)
        if log is not None:
            log(f"epoch {epoch + 1}/{cfg.epochs}  mean_loss {report.mean_loss[-1]:.6f}  "
                f"grad_norm {report.grad_norm_mean[-1]:.4f}  clipped {clips}")
    report.wall_time = time.perf_counter() - t0
    coup.lam = cfg.lambda_eval
    return coup, report
