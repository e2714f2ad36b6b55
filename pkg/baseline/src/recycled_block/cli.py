"""CLI for the recycled-block benchmark: reads the same IDX data directory
and writes the same CSV schemas as the main model's tooling."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import torch

from .data import load_data_dir
from .evaluate import eval_recycled, predictions_at, write_curve_csv, write_variance_csv
from .evaluate import patch_variances
from .model import RecycledBlock
from .train import RecyclerConfig, train_recycled


def cmd_train(args) -> int:
    train_images, _ = load_data_dir(args.data_dir)
    images = train_images[: args.n_train]
    cfg = RecyclerConfig(side=args.side, epochs=args.epochs,
                         batch_size=args.batch_size, seed=args.seed)
    model, losses = train_recycled(images, args.task, cfg, log=print)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.save({"state": model.state_dict(), "cfg": vars(cfg), "task": args.task,
                "h": images.shape[1], "w": images.shape[2]},
               out / f"recycled_{args.task}.pt")
    print(f"final loss {losses[-1]:.6f}; checkpoint in {out}")
    return 0


def _load(out_dir, task, h, w):
    blob = torch.load(Path(out_dir) / f"recycled_{task}.pt", weights_only=False)
    cfg = RecyclerConfig(**blob["cfg"])
    n_tokens = (h // cfg.side) * (w // cfg.side)
    model = RecycledBlock(cfg.side * cfg.side, n_tokens, cfg.d_model,
                          cfg.n_heads, cfg.mlp_ratio)
    model.load_state_dict(blob["state"])
    return model, cfg


def cmd_eval(args) -> int:
    _, test_images = load_data_dir(args.data_dir)
    images = test_images[: args.n_eval]
    model, cfg = _load(args.out_dir, args.task, images.shape[1], images.shape[2])
    t, mean, std, _ = eval_recycled(model, images, args.task, args.iters,
                                    cfg.side, seed=args.seed)
    out = Path(args.out_dir)
    write_curve_csv(out / f"recycled_curve_{args.task}.csv", t, mean, std)
    best = int(t[int(np.argmin(mean))])
    print(f"task={args.task} argmin t={best} min_mse={mean.min():.6f}")
    n_updates = best if args.task == "mask" else max(best - 1, 1)
    preds = predictions_at(model, images, args.task, n_updates, cfg.side, seed=args.seed)
    write_variance_csv(out / f"recycled_variance_{args.task}.csv",
                       patch_variances(preds, cfg.side))
    return 0


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="recycled-block")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("train", "eval"):
        sp = sub.add_parser(name)
        sp.add_argument("--data-dir", required=True)
        sp.add_argument("--out-dir", required=True)
        sp.add_argument("--task", choices=["mask", "denoise"], default="mask")
        sp.add_argument("--side", type=int, default=4)
        sp.add_argument("--seed", type=int, default=0)
        if name == "train":
            sp.add_argument("--n-train", type=int, default=10000)
            sp.add_argument("--epochs", type=int, default=100)
            sp.add_argument("--batch-size", type=int, default=256)
        else:
            sp.add_argument("--n-eval", type=int, default=500)
            sp.add_argument("--iters", type=int, default=20)
    args = p.parse_args(argv)
    try:
        return {"train": cmd_train, "eval": cmd_eval}[args.command](args)
    except (OSError, ValueError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
