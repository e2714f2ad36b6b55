"""Probe the long-run behavior: iterate the trained dynamics for hundreds of
steps from different test digits and watch the finals collapse toward a common
configuration close to the average training image.

Requires a trained checkpoint, e.g. the one cached by the test suite:
    pytest tests/test_acceptance.py -k c04    # trains + caches the model
    python demos/demo_attractor.py tests/_cache/model_default.bsa tests/_cache/digits
"""

import sys

import numpy as np

from spin_attention.checkpoint import load_checkpoint
from spin_attention.data import load_data_dir
from spin_attention.dynamics import DynamicsConfig
from spin_attention.embedding import build_embedding
from spin_attention.evaluation import attractor_probe, mean_offdiag

ckpt_path, data_dir = sys.argv[1], sys.argv[2]
cp = load_checkpoint(ckpt_path)
emb = build_embedding(cp.embed_seed, cp.geom)
train_corpus, test_corpus = load_data_dir(data_dir)

idx = [int(np.nonzero(test_corpus.labels == digit)[0][0]) for digit in range(10)]
inputs = test_corpus.images[idx]

for t_long in (10, 50, 200):
    rep = attractor_probe(cp.coup, emb, cp.geom, inputs,
                          DynamicsConfig(lambda_eval=cp.lambda_eval),
                          n_iters=t_long,
                          train_mean_image=train_corpus.images.mean(axis=0))
    print(f"t={t_long:4d}: mean pairwise similarity {mean_offdiag(rep.pairwise):.4f} "
          f"(inputs {mean_offdiag(rep.input_pairwise):.4f}), "
          f"similarity to train mean {np.mean(rep.to_mean_image):.4f}")
