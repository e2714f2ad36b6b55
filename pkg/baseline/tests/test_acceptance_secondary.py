"""Acceptance tests comparing the recycled transformer block against the
task-agnostic coupling model, both on 4x4 patches of the same test split.

One test per criterion; each prints an explicit pass line.
"""

import numpy as np

from spin_attention.dynamics import DynamicsConfig
from spin_attention.evaluation import CorruptionSpec, evaluate_curve, predictions_at

from recycled_block.evaluate import eval_recycled, patch_variances
from recycled_block.evaluate import predictions_at as recycled_predictions_at

T_RECYCLED = 20
T_PRIMARY = 50


def _primary_curve(primary, images, kind):
    cp, emb = primary
    spec = CorruptionSpec(kind=kind, seed=0)
    curve, _ = evaluate_curve(cp.coup, emb, cp.geom, images, spec, T_PRIMARY,
                              DynamicsConfig(lambda_eval=1.0))
    return curve


def test_c10_recycled_beats_primary(primary_4x4, recycled_mask, recycled_denoise,
                                    test_images):
    lines = []
    for kind, (model, cfg) in (("mask", recycled_mask), ("denoise", recycled_denoise)):
        task_curve = _primary_curve(primary_4x4, test_images,
                                    "noise" if kind == "denoise" else "mask")
        t, mean, _, _ = eval_recycled(model, test_images, kind, T_RECYCLED,
                                      cfg.side, seed=0)
        t_best = int(t[int(np.argmin(mean))])
        assert 3 <= t_best <= 7, f"{kind}: recycled argmin t={t_best}"
        assert mean.min() < task_curve.mean_mse.min(), (
            f"{kind}: recycled min {mean.min():.5f} not below "
            f"primary min {task_curve.mean_mse.min():.5f}")
        lines.append(f"{kind}: argmin t={t_best}, min {mean.min():.5f} < "
                     f"primary {task_curve.mean_mse.min():.5f}")
    print("\n[criterion 10] PASS recycled block transient: " + "; ".join(lines))


def test_c11_patch_variance_ordering(primary_4x4, recycled_mask, test_images):
    cp, emb = primary_4x4
    curve = _primary_curve(primary_4x4, test_images, "mask")
    spec = CorruptionSpec(kind="mask", seed=0)
    primary_preds = predictions_at(cp.coup, emb, cp.geom, test_images, spec,
                                   curve.argmin_t, DynamicsConfig(lambda_eval=1.0))
    primary_var = np.median([img.reshape(7, 4, 7, 4).transpose(0, 2, 1, 3)
                             .reshape(-1, 16).var(axis=1) for img in primary_preds])

    model, cfg = recycled_mask
    t, mean, _, _ = eval_recycled(model, test_images, "mask", T_RECYCLED,
                                  cfg.side, seed=0)
    t_best = int(t[int(np.argmin(mean))])
    recycled_preds = recycled_predictions_at(model, test_images, "mask", t_best,
                                             cfg.side, seed=0)
    recycled_var = np.median(patch_variances(recycled_preds, cfg.side))

    assert primary_var < recycled_var
    print(f"\n[criterion 11] PASS patch-variance ordering: primary median "
          f"{primary_var:.6f} < recycled median {recycled_var:.6f} (4x4 patches)")
