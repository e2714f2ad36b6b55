"""Attractor-network self-attention on vector-spin image tokens.

A sequence of unit-norm spins evolves under an attention-masked local field
whose pre-normalization update is the negative gradient of per-token
energies; couplings are trained without backpropagation by minimizing the
summed token energies of the data.
"""

from .data import ImageCorpus, load_data_dir, load_idx, split
from .dynamics import (
    CouplingTensor,
    DynamicsConfig,
    attention_scores,
    factorized_coupling,
    iterate,
    local_energy,
    total_energy,
    update_step,
)
from .embedding import (
    EmbeddingMap,
    PatchGeometry,
    build_embedding,
    deembed_image,
    embed_image,
    embed_pixel,
    invert_pixel,
    normalize_spin,
)
from .evaluation import (
    CorruptionSpec,
    add_noise,
    attractor_probe,
    evaluate_curve,
    mask_tokens,
    mse,
    patch_variance_histogram,
)
from .training import TrainConfig, TrainReport, coupling_gradient, init_couplings, \
    pseudolikelihood_loss, sgd_step, train

__version__ = "0.1.0"
