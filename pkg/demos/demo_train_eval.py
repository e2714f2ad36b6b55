"""End-to-end desk run: generate a small digit corpus, train the couplings
without backprop, and plot-in-text the masked-prediction and denoising MSE
curves showing the transient minimum.

Run: python demos/demo_train_eval.py   (a few minutes on one CPU)
"""

import tempfile
from pathlib import Path


from spin_attention.data import load_data_dir, split
from spin_attention.datagen import make_corpus
from spin_attention.dynamics import DynamicsConfig
from spin_attention.embedding import PatchGeometry, build_embedding
from spin_attention.evaluation import CorruptionSpec, evaluate_curve
from spin_attention.training import TrainConfig, train

work = Path(tempfile.mkdtemp(prefix="spin_attention_demo_"))
data_dir = make_corpus(work / "data", n_train=3000, n_test=300, seed=7)
train_corpus, test_corpus = load_data_dir(data_dir)
subset, _ = split(train_corpus, 3000)

geom = PatchGeometry(train_corpus.height, train_corpus.width, side=2)
emb = build_embedding(1234, geom)

cfg = TrainConfig(epochs=8)
coup, report = train(subset, emb, geom, cfg, log=print)
print(f"trained in {report.wall_time:.0f}s; loss {report.mean_loss[0]:.1f} -> "
      f"{report.mean_loss[-1]:.1f}")

dyn = DynamicsConfig(lambda_eval=1.0)
for kind in ("mask", "noise"):
    spec = CorruptionSpec(kind=kind, mask_fraction=0.3, noise_variance=0.7, seed=0)
    curve, _ = evaluate_curve(coup, emb, geom, test_corpus.images[:150], spec, 50, dyn)
    print(f"\n{kind}: corrupted-input MSE {curve.baseline_mse:.5f}, "
          f"minimum {curve.mean_mse.min():.5f} at t={curve.argmin_t}, "
          f"t=50 MSE {curve.mean_mse[-1]:.5f}")
    lo, hi = curve.mean_mse.min(), curve.mean_mse.max()
    for t, v in zip(curve.t[:30], curve.mean_mse[:30]):
        bar = "#" * int(1 + 50 * (v - lo) / (hi - lo + 1e-12))
        print(f"  t={t:3d}  {v:.5f} {bar}")
