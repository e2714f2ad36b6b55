"""Recurrent spin dynamics: coupling-mediated pairwise scores, the
row-stochastic attention mask, token energies, and the update whose
pre-normalization field is the negative gradient of each token's energy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import normalize_spins


@dataclass
class CouplingTensor:
    """Position-dependent d x d couplings between token pairs.

    j has shape (N, N, d, d) with all-zero diagonal blocks; lam is the
    scalar multiplying the couplings everywhere they enter; norm_ref is the
    global Frobenius norm recorded at initialization, which training keeps
    fixed. No symmetry is imposed.
    """

    j: np.ndarray
    lam: float = 1.0
    norm_ref: float = 0.0

    def __post_init__(self):
        self.j = np.asarray(self.j, dtype=np.float64)
        if self.norm_ref == 0.0:
            self.norm_ref = float(np.linalg.norm(self.j))

    @property
    def n_tokens(self) -> int:
        return self.j.shape[0]

    @property
    def d(self) -> int:
        return self.j.shape[2]


@dataclass
class DynamicsConfig:
    gamma: float = 1.0
    lambda_eval: float = 1.0
    max_iter: int = 50
    norm_mode: str = "l2"

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


def zero_diagonal(j: np.ndarray) -> np.ndarray:
    """Zero the diagonal blocks of an (N,N,d,d) tensor in place."""
    n = j.shape[0]
    j[np.arange(n), np.arange(n)] = 0.0
    return j


def _coupled_values(j: np.ndarray, xb: np.ndarray) -> np.ndarray:
    """J_ij x_j for a batch: returns v with v[jj, ii, :, b] = J[ii,jj] @ x[b,jj].

    Laid out as batched matmuls over the source index jj so BLAS does the
    heavy lifting; this is the hot path of both training and inference.
    """
    n, d = j.shape[0], j.shape[2]
    bsz = xb.shape[0]
    jt = np.ascontiguousarray(j.transpose(1, 0, 2, 3).reshape(n, n * d, d))
    xt = np.ascontiguousarray(xb.transpose(1, 2, 0))  # (N_j, d, B)
    return np.matmul(jt, xt).reshape(n, n, d, bsz)


def _batch_scores(xb: np.ndarray, j: np.ndarray, lam: float, values=None) -> np.ndarray:
    """Raw attention scores lam * x_i . J_ij x_j, shape (B, N, N), with the
    diagonal set to -inf so softmax/logsumexp skip j = i."""
    v = _coupled_values(j, xb) if values is None else values
    s = lam * np.einsum("bid,jidb->bij", xb, v)
    n = s.shape[1]
    s[:, np.arange(n), np.arange(n)] = -np.inf
    return s


def _softmax_rows(scores: np.ndarray) -> np.ndarray:
    """Row softmax with max-subtraction; -inf entries get weight 0."""
    m = scores.max(axis=-1, keepdims=True)
    e = np.exp(scores - m)
    return e / e.sum(axis=-1, keepdims=True)


def batch_attention(xb: np.ndarray, j: np.ndarray, lam: float) -> np.ndarray:
    return _softmax_rows(_batch_scores(xb, j, lam))


def attention_scores(x: np.ndarray, coup: CouplingTensor, lam: float | None = None) -> np.ndarray:
    """Attention mask alpha[i, j]: softmax over j != i of the scaled pairwise
    scores. Rows sum to 1 over j != i; the diagonal is 0."""
    if x.shape[0] < 2:
        raise ValueError("attention needs at least two tokens")
    lam = coup.lam if lam is None else lam
    return batch_attention(x[None], coup.j, lam)[0]


def batch_update(
    xb: np.ndarray,
    j: np.ndarray,
    lam: float,
    gamma: float = 1.0,
    norm_mode: str = "l2",
) -> np.ndarray:
    """One synchronous update of every spin in a batch of sequences."""
    v = _coupled_values(j, xb)
    alpha = _softmax_rows(_batch_scores(xb, j, lam, values=v))
    fld = lam * np.einsum("bij,jidb->bid", alpha, v)
    return normalize_spins(fld + gamma * xb, norm_mode)


def update_step(x: np.ndarray, coup: CouplingTensor, cfg: DynamicsConfig) -> np.ndarray:
    """Synchronous update of a single sequence; all fields are computed from
    the pre-update state, then each spin is renormalized."""
    return batch_update(x[None], coup.j, cfg.lambda_eval, cfg.gamma, cfg.norm_mode)[0]


def batch_energy(xb: np.ndarray, j: np.ndarray, lam: float) -> np.ndarray:
    """Sum of token energies per sequence, shape (B,)."""
    s = _batch_scores(xb, j, lam)
    m = s.max(axis=-1, keepdims=True)
    lse = m[..., 0] + np.log(np.exp(s - m).sum(axis=-1))
    return -lse.sum(axis=-1)


def local_energy(i: int, x: np.ndarray, coup: CouplingTensor, lam: float | None = None) -> float:
    """Token energy: negative log-sum-exp over j != i of the scaled scores."""
    if x.shape[0] < 2:
        raise ValueError("local energy needs at least two tokens")
    lam = coup.lam if lam is None else lam
    s = _batch_scores(x[None], coup.j, lam)[0, i]
    m = s.max()
    return float(-(m + np.log(np.exp(s - m).sum())))


def total_energy(x: np.ndarray, coup: CouplingTensor, lam: float | None = None) -> float:
    """Sum of local energies over all tokens."""
    lam = coup.lam if lam is None else lam
    return float(batch_energy(x[None], coup.j, lam)[0])


def iterate(
    x0: np.ndarray,
    coup: CouplingTensor,
    cfg: DynamicsConfig,
    n_steps: int,
    recorder=None,
) -> np.ndarray:
    """Run n_steps synchronous updates; returns the (T, N, d) stack of states
    after each step. recorder(t, x) is called with t = 1..T as states appear,
    so snapshots can be de-embedded lazily."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    x = np.asarray(x0, dtype=np.float64)
    out = np.empty((n_steps,) + x.shape)
    for t in range(n_steps):
        x = update_step(x, coup, cfg)
        out[t] = x
        if recorder is not None:
            recorder(t + 1, x)
    return out


def factorized_coupling(wq: np.ndarray, wk: np.ndarray) -> np.ndarray:
    """Build a d x d coupling as the sum of query/key outer products; rank is
    at most the number of factor pairs."""
    wq = np.atleast_2d(np.asarray(wq, dtype=np.float64))
    wk = np.atleast_2d(np.asarray(wk, dtype=np.float64))
    if wq.shape != wk.shape:
        raise ValueError(f"factor shapes differ: {wq.shape} vs {wk.shape}")
    if wq.shape[0] == 0:
        return np.zeros((wq.shape[1], wq.shape[1]))
    return wq.T @ wk
