"""Session fixtures for the benchmark acceptance tests (criteria on the
recycled block vs the coupling model, both on 4x4 patches).

Training runs are cached under baseline/tests/_cache; delete that directory
to retrain. The coupling model is imported as a library here — the package
sources stay decoupled (file-level interchange only), but the comparison
tests need both models in one process.
"""

from pathlib import Path

import numpy as np
import pytest
import torch

from spin_attention.checkpoint import load_checkpoint, save_checkpoint
from spin_attention.data import load_data_dir, split
from spin_attention.datagen import make_corpus
from spin_attention.embedding import PatchGeometry, build_embedding
from spin_attention.training import TrainConfig, train

from recycled_block.model import RecycledBlock
from recycled_block.train import RecyclerConfig, train_recycled

CACHE = Path(__file__).parent / "_cache"

CORPUS_SEED = 7
N_TRAIN_FILES = 6000
N_TEST_FILES = 1000
TRAIN_SUBSET = 4000
EMBED_SEED = 1234
SIDE = 4


@pytest.fixture(scope="session")
def data_dir() -> Path:
    d = CACHE / "digits"
    if not (d / "train-images-idx3-ubyte").exists():
        make_corpus(d, n_train=N_TRAIN_FILES, n_test=N_TEST_FILES, seed=CORPUS_SEED)
    return d


@pytest.fixture(scope="session")
def primary_4x4(data_dir):
    """Coupling-model checkpoint trained task-agnostically on 4x4 patches."""
    ck = CACHE / "primary_4x4.bsa"
    if not ck.exists():
        corpus, _ = load_data_dir(data_dir)
        subset, _ = split(corpus, TRAIN_SUBSET)
        geom = PatchGeometry(corpus.height, corpus.width, side=SIDE)
        emb = build_embedding(EMBED_SEED, geom)
        cfg = TrainConfig()
        coup, _ = train(subset, emb, geom, cfg, log=print)
        save_checkpoint(ck, coup, geom, EMBED_SEED, "l2", cfg.lambda_eval)
    cp = load_checkpoint(ck)
    return cp, build_embedding(cp.embed_seed, cp.geom)


def _recycled(data_dir, task: str) -> tuple[RecycledBlock, RecyclerConfig]:
    pt = CACHE / f"recycled_{task}.pt"
    cfg = RecyclerConfig(side=SIDE)
    if not pt.exists():
        corpus, _ = load_data_dir(data_dir)
        model, _ = train_recycled(corpus.images[:TRAIN_SUBSET], task, cfg, log=print)
        torch.save(model.state_dict(), pt)
    n_tokens = (28 // SIDE) * (28 // SIDE)
    model = RecycledBlock(SIDE * SIDE, n_tokens, cfg.d_model, cfg.n_heads, cfg.mlp_ratio)
    model.load_state_dict(torch.load(pt, weights_only=True))
    return model, cfg


@pytest.fixture(scope="session")
def recycled_mask(data_dir):
    return _recycled(data_dir, "mask")


@pytest.fixture(scope="session")
def recycled_denoise(data_dir):
    return _recycled(data_dir, "denoise")


@pytest.fixture(scope="session")
def test_images(data_dir) -> np.ndarray:
    _, test = load_data_dir(data_dir)
    return test.images[:300]
