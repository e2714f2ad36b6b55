"""Weight-tied transformer block recycled as a recurrent network; per-task
backprop-trained benchmark for the attractor-network self-attention model."""

from .model import RecycledBlock, sinusoidal_encoding
from .train import RecyclerConfig, train_recycled
from .evaluate import eval_recycled, patch_variances, predictions_at

__version__ = "0.1.0"
