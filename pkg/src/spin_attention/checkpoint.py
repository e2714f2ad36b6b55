"""Binary checkpoint format for trained couplings.

Layout (little-endian): magic "BSA1", uint32 version, six uint32 geometry
fields (H, W, side, a, N, d), int64 embedding seed, uint8 norm mode
(0 = l2, 1 = ln), float64 lambda_eval, float64 norm_ref, then N*N*d*d
float32 coupling entries in row-major (i, j, row, col) order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import CouplingTensor, zero_diagonal
from .embedding import PatchGeometry

MAGIC = b"BSA1"
VERSION = 1
_HEADER = struct.Struct("<4sI6IqBdd")
_NORM_MODES = ["l2", "ln"]


class CheckpointError(Exception):
    pass


@dataclass
class Checkpoint:
    coup: CouplingTensor
    geom: PatchGeometry
    embed_seed: int
    norm_mode: str
    lambda_eval: float


def save_checkpoint(path, coup: CouplingTensor, geom: PatchGeometry,
                    embed_seed: int, norm_mode: str, lambda_eval: float) -> None:
    n, d = coup.n_tokens, coup.d
    header = _HEADER.pack(
        MAGIC, VERSION,
        geom.height, geom.width, geom.side, geom.a, n, d,
        embed_seed, _NORM_MODES.index(norm_mode), lambda_eval, coup.norm_ref,
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(coup.j.astype("<f4").tobytes())


def load_checkpoint(path) -> Checkpoint:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise CheckpointError(f"{path}: truncated header")
    magic, version, h, w, side, a, n, d, seed, nm, lam_eval, norm_ref = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"{path}: unrecognized version {version}")
    if nm >= len(_NORM_MODES):
        raise CheckpointError(f"{path}: unknown norm mode code {nm}")
    count = n * n * d * d
    body = np.frombuffer(raw, dtype="<f4", count=-1, offset=_HEADER.size)
    if body.size != count:
        raise CheckpointError(f"{path}: expected {count} coupling entries, found {body.size}")
    j = body.astype(np.float64).reshape(n, n, d, d)
    zero_diagonal(j)
    geom = PatchGeometry(height=h, width=w, side=side, d=d)
    if geom.a != a or geom.n_tokens != n:
        raise CheckpointError(f"{path}: inconsistent geometry fields")
    coup = CouplingTensor(j=j, lam=lam_eval, norm_ref=norm_ref)
    return Checkpoint(coup=coup, geom=geom, embed_seed=seed,
                      norm_mode=_NORM_MODES[nm], lambda_eval=lam_eval)
