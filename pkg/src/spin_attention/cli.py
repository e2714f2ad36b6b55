"""Command-line entry point: train / eval / probe / variance subcommands."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt
from .config import ConfigError, RunConfig, load_config
from .data import load_data_dir, split, write_pgm
from .dynamics import DynamicsConfig
from .embedding import PatchGeometry, build_embedding
from .evaluation import (
    CorruptionSpec,
    attractor_probe,
    evaluate_curve,
    patch_variance_histogram,
    predictions_at,
)
from .training import TrainConfig, train


class _OutputTracker:
    """Collects written paths so a failed command can remove partial output."""

    def __init__(self):
        self.paths: list[Path] = []

    def add(self, path) -> Path:
        p = Path(path)
        self.paths.append(p)
        return p

    def cleanup(self):
        for p in self.paths:
            p.unlink(missing_ok=True)


def _geometry(cfg: RunConfig, height: int, width: int) -> PatchGeometry:
    return PatchGeometry(height=height, width=width, side=cfg.side, d=cfg.d)


def _spec(cfg: RunConfig) -> CorruptionSpec:
    kind = "mask" if cfg.task == "mask" else "noise"
    return CorruptionSpec(kind=kind, mask_fraction=cfg.mask_fraction,
                          noise_variance=cfg.noise_variance, seed=cfg.eval_seed)


def _load_model(cfg: RunConfig):
    cp = ckpt.load_checkpoint(cfg.checkpoint_path())
    emb = build_embedding(cp.embed_seed, cp.geom)
    dyn = DynamicsConfig(gamma=cfg.gamma, lambda_eval=cp.lambda_eval,
                         max_iter=cfg.iters, norm_mode=cp.norm_mode)
    return cp, emb, dyn


def cmd_train(cfg: RunConfig, out: _OutputTracker) -> None:
    train_corpus, _ = load_data_dir(cfg.data_dir)
    train_view, _ = split(train_corpus, min(cfg.n_train, len(train_corpus)))
    geom = _geometry(cfg, train_corpus.height, train_corpus.width)
    emb = build_embedding(cfg.embed_seed, geom)
    tc = TrainConfig(epochs=cfg.epochs, batch_size=cfg.batch_size,
                     lambda_train=cfg.lambda_train, lambda_eval=cfg.lambda_eval,
                     learning_rate=cfg.learning_rate, clip_threshold=cfg.clip_threshold,
                     seed=cfg.seed)
    coup, report = train(train_view, emb, geom, tc, log=print)
    if any(not np.isfinite(l) for l in report.mean_loss):
        raise FloatingPointError("non-finite training loss")
    Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
    ckpt.save_checkpoint(out.add(cfg.checkpoint_path()), coup, geom,
                         cfg.embed_seed, cfg.norm_mode, cfg.lambda_eval)
    report.to_csv(out.add(Path(cfg.out_dir) / "train_report.csv"))
    print(f"checkpoint written to {cfg.checkpoint_path()}")


def cmd_eval(cfg: RunConfig, out: _OutputTracker) -> None:
    cp, emb, dyn = _load_model(cfg)
    _, test = load_data_dir(cfg.data_dir)
    if (test.height, test.width) != (cp.geom.height, cp.geom.width):
        raise ConfigError("checkpoint geometry does not match the data")
    images = test.images[: cfg.n_eval]
    curve, kept = evaluate_curve(cp.coup, emb, cp.geom, images, _spec(cfg),
                                 cfg.iters, dyn, keep_images_for=cfg.n_samples)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    curve.to_csv(out.add(out_dir / f"curve_{cfg.task}.csv"))
    print(f"task={cfg.task} argmin t={curve.argmin_t} "
          f"min_mse={curve.mean_mse.min():.6f} baseline_mse={curve.baseline_mse:.6f}")
    for k, (clean, corrupted, preds) in enumerate(kept):
        strip = np.concatenate([clean, corrupted, *preds], axis=1)
        write_pgm(out.add(out_dir / f"sample_{cfg.task}_{k}.pgm"), strip)


def cmd_probe(cfg: RunConfig, out: _OutputTracker) -> None:
    cp, emb, dyn = _load_model(cfg)
    train_corpus, test = load_data_dir(cfg.data_dir)
    inputs = test.images[: cfg.n_probe]
    mean_img = train_corpus.images.mean(axis=0)
    rep = attractor_probe(cp.coup, emb, cp.geom, inputs, dyn,
                          n_iters=cfg.probe_iters, train_mean_image=mean_img)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out.add(out_dir / "probe_similarity.csv"), "w", newline="") as f:
        w = csv.writer(f)
        for row in rep.pairwise:
            w.writerow([f"{v:.10g}" for v in row])
    write_pgm(out.add(out_dir / "train_mean.pgm"), mean_img)
    for k in range(rep.finals.shape[0]):
        write_pgm(out.add(out_dir / f"probe_final_{k}.pgm"), rep.finals[k])
    off = rep.pairwise[~np.eye(len(inputs), dtype=bool)]
    print(f"probe: mean pairwise similarity {off.mean():.4f} "
          f"(inputs {rep.input_pairwise[~np.eye(len(inputs), dtype=bool)].mean():.4f})")


def cmd_variance(cfg: RunConfig, out: _OutputTracker) -> None:
    cp, emb, dyn = _load_model(cfg)
    _, test = load_data_dir(cfg.data_dir)
    images = test.images[: cfg.n_eval]
    spec = _spec(cfg)
    curve, _ = evaluate_curve(cp.coup, emb, cp.geom, images, spec, cfg.iters, dyn)
    best_t = curve.argmin_t
    n_updates = best_t if curve.t_index_convention == "update_first" else max(best_t - 1, 1)
    preds = predictions_at(cp.coup, emb, cp.geom, images, spec, n_updates, dyn)
    edges, mass = patch_variance_histogram(preds, cp.geom, bins=cfg.bins)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out.add(out_dir / "patch_variance.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["bin_left", "bin_right", "mass"])
        for lo, hi, m in zip(edges[:-1], edges[1:], mass):
            w.writerow([f"{lo:.10g}", f"{hi:.10g}", f"{m:.10g}"])
    print(f"variance histogram at t={best_t} written ({cfg.bins} bins)")


_COMMANDS = {"train": cmd_train, "eval": cmd_eval, "probe": cmd_probe, "variance": cmd_variance}


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spin-attention",
                                description="attractor-network self-attention on image tokens")
    sub = p.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key=value config file")
        sp.add_argument("--data-dir", dest="data_dir")
        sp.add_argument("--out-dir", dest="out_dir")
        sp.add_argument("--checkpoint")
        sp.add_argument("--task", choices=["mask", "denoise"])
        sp.add_argument("--iters", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config field")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    overrides = {}
    for flag in ("data_dir", "out_dir", "checkpoint", "task", "iters", "seed"):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[flag] = value
    for item in args.set:
        if "=" not in item:
            print(f"error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return 2
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    out = _OutputTracker()
    try:
        cfg = load_config(args.config, overrides)
        _COMMANDS[args.command](cfg, out)
    except (ConfigError, FloatingPointError, OSError, ValueError,
            ckpt.CheckpointError) as exc:
        out.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
